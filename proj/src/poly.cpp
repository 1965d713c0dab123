// poly.cpp -- polynomial arithmetic and eigenvalue-based root finding.

#include "robustmc/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "robustmc/errors.hpp"

namespace robustmc::poly {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw ConfigError("Polynomial: empty coefficient list");
    std::size_t first = 0;
    while (first + 1 < coeffs_.size() && coeffs_[first] == 0.0) ++first;
    if (first > 0) coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<long>(first));
}

double Polynomial::eval(double s) const {
    double acc = 0.0;
    for (double c : coeffs_) acc = acc * s + c;
    return acc;
}

std::complex<double> Polynomial::eval(std::complex<double> s) const {
    std::complex<double> acc = 0.0;
    for (double c : coeffs_) acc = acc * s + c;
    return acc;
}

Polynomial Polynomial::operator*(const Polynomial& rhs) const {
    if (is_zero() || rhs.is_zero()) return Polynomial({0.0});
    std::vector<double> out(coeffs_.size() + rhs.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j)
            out[i + j] += coeffs_[i] * rhs.coeffs_[j];
    return Polynomial(std::move(out));
}

Polynomial Polynomial::operator+(const Polynomial& rhs) const {
    const std::size_t n = std::max(coeffs_.size(), rhs.coeffs_.size());
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        out[n - coeffs_.size() + i] += coeffs_[i];
    for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i)
        out[n - rhs.coeffs_.size() + i] += rhs.coeffs_[i];
    return Polynomial(std::move(out));
}

Polynomial Polynomial::scaled(double c) const {
    std::vector<double> out = coeffs_;
    for (double& v : out) v *= c;
    return Polynomial(std::move(out));
}

namespace {

class SquareMatrix {
  public:
    explicit SquareMatrix(int n) : n_(n), data_(static_cast<std::size_t>(n) * n, 0.0) {}
    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * n_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * n_ + c]; }
    int size() const { return n_; }

  private:
    int n_;
    std::vector<double> data_;
};

// Parlett-Reinsch balancing: similarity scaling by powers of the radix to
// even out row/column norms before the QR iteration.
void balance(SquareMatrix& a) {
    const int n = a.size();
    constexpr double radix = 2.0;
    constexpr double sq = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::fabs(a(j, i));
                r += std::fabs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sq;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sq;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                const double ginv = 1.0 / f;
                for (int j = 0; j < n; ++j) a(i, j) *= ginv;
                for (int j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR
// iteration (the classic EISPACK hqr scheme, eigenvalues only).
std::vector<std::complex<double>> hessenberg_qr_eigenvalues(SquareMatrix& a) {
    const int n = a.size();
    std::vector<std::complex<double>> roots;
    roots.reserve(n);
    const double eps = std::numeric_limits<double>::epsilon();

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::fabs(a(i, j));

    int nn = n - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        int l;
        do {
            for (l = nn; l >= 1; --l) {
                double s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::fabs(a(l, l - 1)) <= eps * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            double x = a(nn, nn);
            if (l == nn) {
                roots.emplace_back(x + t, 0.0);
                --nn;
            } else {
                double y = a(nn - 1, nn - 1);
                double w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    const double p = 0.5 * (y - x);
                    const double q = p * p + w;
                    const double z = std::sqrt(std::fabs(q));
                    x += t;
                    if (q >= 0.0) {
                        const double zz = p + (p >= 0.0 ? z : -z);
                        roots.emplace_back(x + zz, 0.0);
                        roots.emplace_back(zz == 0.0 ? x : x - w / zz, 0.0);
                    } else {
                        roots.emplace_back(x + p, z);
                        roots.emplace_back(x + p, -z);
                    }
                    nn -= 2;
                } else {
                    if (its == 30)
                        throw NumericalError("poly_roots: QR iteration failed to converge");
                    if (its == 10 || its == 20) {
                        // exceptional shift
                        t += x;
                        for (int i = 0; i <= nn; ++i) a(i, i) -= x;
                        const double s =
                            std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;

                    int m;
                    double p = 0.0, q = 0.0, r = 0.0;
                    for (m = nn - 2; m >= l; --m) {
                        const double z = a(m, m);
                        const double rr = x - z;
                        const double ss = y - z;
                        p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - rr - ss;
                        r = a(m + 2, m + 1);
                        const double scale = std::fabs(p) + std::fabs(q) + std::fabs(r);
                        p /= scale;
                        q /= scale;
                        r /= scale;
                        if (m == l) break;
                        const double u = std::fabs(a(m, m - 1)) * (std::fabs(q) + std::fabs(r));
                        const double v = std::fabs(p) * (std::fabs(a(m - 1, m - 1)) +
                                                         std::fabs(a(m, m)) +
                                                         std::fabs(a(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != m + 2) a(i, i - 3) = 0.0;
                    }

                    for (int k = m; k <= nn - 1; ++k) {
                        double knorm = 0.0;
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = k + 1 != nn ? a(k + 2, k - 1) : 0.0;
                            knorm = std::fabs(p) + std::fabs(q) + std::fabs(r);
                            if (knorm != 0.0) {
                                p /= knorm;
                                q /= knorm;
                                r /= knorm;
                            }
                        }
                        double s = std::sqrt(p * p + q * q + r * r);
                        if (p < 0.0) s = -s;
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) a(k, k - 1) = -a(k, k - 1);
                        } else {
                            a(k, k - 1) = -s * knorm;
                        }
                        p += s;
                        const double px = p / s;
                        const double py = q / s;
                        const double pz = r / s;
                        q /= p;
                        r /= p;
                        for (int j = k; j <= nn; ++j) {
                            double pp = a(k, j) + q * a(k + 1, j);
                            if (k + 1 != nn) {
                                pp += r * a(k + 2, j);
                                a(k + 2, j) -= pp * pz;
                            }
                            a(k + 1, j) -= pp * py;
                            a(k, j) -= pp * px;
                        }
                        const int mmin = nn < k + 3 ? nn : k + 3;
                        for (int i = l; i <= mmin; ++i) {
                            double pp = px * a(i, k) + py * a(i, k + 1);
                            if (k + 1 != nn) {
                                pp += pz * a(i, k + 2);
                                a(i, k + 2) -= pp * r;
                            }
                            a(i, k + 1) -= pp * q;
                            a(i, k) -= pp;
                        }
                    }
                }
            }
        } while (l < nn - 1 && nn >= 0);
    }
    return roots;
}

} // namespace

std::vector<std::complex<double>> poly_roots(const Polynomial& p) {
    const auto& c = p.coeffs();
    if (p.degree() < 1) throw ConfigError("poly_roots: degree must be >= 1");
    if (c.front() == 0.0) throw ConfigError("poly_roots: leading coefficient is zero");

    // Peel exact zero roots so the companion matrix stays well scaled.
    std::size_t trailing = 0;
    while (trailing < c.size() - 1 && c[c.size() - 1 - trailing] == 0.0) ++trailing;

    std::vector<std::complex<double>> roots(trailing, std::complex<double>(0.0, 0.0));

    const int deg = p.degree() - static_cast<int>(trailing);
    if (deg >= 1) {
        std::vector<double> monic(deg);
        for (int i = 0; i < deg; ++i) monic[i] = c[static_cast<std::size_t>(i) + 1] / c[0];

        if (deg == 1) {
            roots.emplace_back(-monic[0], 0.0);
        } else if (deg == 2) {
            const double b = monic[0], cc = monic[1];
            const double disc = b * b - 4.0 * cc;
            if (disc >= 0.0) {
                const double q = -0.5 * (b + (b >= 0.0 ? std::sqrt(disc) : -std::sqrt(disc)));
                roots.emplace_back(q, 0.0);
                roots.emplace_back(q != 0.0 ? cc / q : 0.0, 0.0);
            } else {
                const double re = -0.5 * b;
                const double im = 0.5 * std::sqrt(-disc);
                roots.emplace_back(re, im);
                roots.emplace_back(re, -im);
            }
        } else {
            SquareMatrix a(deg);
            for (int i = 0; i < deg; ++i) a(0, i) = -monic[i];
            for (int i = 1; i < deg; ++i) a(i, i - 1) = 1.0;
            balance(a);
            auto eig = hessenberg_qr_eigenvalues(a);
            roots.insert(roots.end(), eig.begin(), eig.end());
        }
    }

    double max_coeff = 0.0;
    for (double v : c) max_coeff = std::max(max_coeff, std::fabs(v));
    for (const auto& z : roots) {
        const double residual = std::abs(p.eval(z));
        const double scale = std::pow(std::max(1.0, std::abs(z)), p.degree());
        if (residual > 1e-8 * max_coeff * scale)
            throw NumericalError("poly_roots: residual check failed, |p(z)| = " +
                                 std::to_string(residual));
    }
    return roots;
}

} // namespace robustmc::poly
