// poly.hpp -- dense real polynomials and companion-matrix root finding.
#pragma once

#include <complex>
#include <vector>

namespace robustmc::poly {

// Coefficients highest degree first; normalized() strips leading zeros.
class Polynomial {
  public:
    Polynomial() : coeffs_{0.0} {}
    explicit Polynomial(std::vector<double> coeffs);

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<double>& coeffs() const { return coeffs_; }

    double eval(double s) const;
    std::complex<double> eval(std::complex<double> s) const;

    Polynomial operator*(const Polynomial& rhs) const;
    Polynomial operator+(const Polynomial& rhs) const;
    Polynomial scaled(double c) const;

    bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

  private:
    std::vector<double> coeffs_;
};

// All complex roots with multiplicity, by balanced companion-matrix QR.
// Each root is checked against |p(z)| <= 1e-8 * max|coeff| * max(1,|z|)^deg;
// violations raise NumericalError.
std::vector<std::complex<double>> poly_roots(const Polynomial& p);

} // namespace robustmc::poly
