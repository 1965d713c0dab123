// uncertainty.cpp -- set construction, uniform sampling, size function.

#include "robustmc/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robustmc/errors.hpp"

namespace robustmc::uncertainty {

namespace {

int variant_dim(const UncertaintySet::Variant& v) {
    if (const auto* lp = std::get_if<LpBall>(&v)) return lp->dim;
    if (const auto* bx = std::get_if<Box>(&v)) return bx->dim;
    if (const auto* sp = std::get_if<ScalarBlockSpectral>(&v)) {
        int d = 0;
        for (const auto& blk : sp->blocks) d += blk.field == BlockField::Complex ? 2 : 1;
        return d;
    }
    const auto& sx = std::get<StarSimplex>(v);
    return sx.vertices.empty() ? 0 : static_cast<int>(sx.vertices.front().size());
}

void validate(const UncertaintySet::Variant& v) {
    if (const auto* lp = std::get_if<LpBall>(&v)) {
        if (lp->dim < 1) throw ConfigError("LpBall: dim must be >= 1");
        if (!(lp->p >= 1.0)) throw ConfigError("LpBall: norm order must be >= 1");
        return;
    }
    if (const auto* bx = std::get_if<Box>(&v)) {
        if (bx->dim < 1) throw ConfigError("Box: dim must be >= 1");
        return;
    }
    if (const auto* sp = std::get_if<ScalarBlockSpectral>(&v)) {
        if (sp->blocks.empty()) throw ConfigError("ScalarBlockSpectral: needs at least one block");
        for (const auto& blk : sp->blocks)
            if (blk.multiplicity < 1) throw ConfigError("ScalarBlockSpectral: multiplicity >= 1");
        return;
    }
    const auto& sx = std::get<StarSimplex>(v);
    if (sx.vertices.size() < 2) throw ConfigError("StarSimplex: needs dim+1 vertices");
    const std::size_t d = sx.vertices.front().size();
    if (sx.vertices.size() != d + 1)
        throw ConfigError("StarSimplex: expected dim+1 = " + std::to_string(d + 1) +
                          " vertices, got " + std::to_string(sx.vertices.size()));
    for (const auto& vert : sx.vertices)
        if (vert.size() != d) throw ConfigError("StarSimplex: inconsistent vertex dimensions");
}

} // namespace

UncertaintySet::UncertaintySet(Variant v) : variant_(std::move(v)) {
    validate(variant_);
    dim_ = variant_dim(variant_);
    center_.assign(dim_, 0.0);
    if (const auto* sx = std::get_if<StarSimplex>(&variant_)) init_simplex(*sx);
}

void UncertaintySet::init_simplex(const StarSimplex& s) {
    const int d = dim_;
    for (const auto& vert : s.vertices)
        for (int i = 0; i < d; ++i) center_[i] += vert[i] / static_cast<double>(d + 1);

    // Factor the edge matrix [v1-v0 | ... | vd-v0] once; barycentric solves
    // reuse it. Column-major, partial pivoting.
    lu_.assign(static_cast<std::size_t>(d) * d, 0.0);
    pivot_.assign(d, 0);
    auto at = [&](int r, int c) -> double& { return lu_[static_cast<std::size_t>(c) * d + r]; };
    for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r) at(r, c) = s.vertices[c + 1][r] - s.vertices[0][r];

    for (int c = 0; c < d; ++c) {
        int piv = c;
        for (int r = c + 1; r < d; ++r)
            if (std::fabs(at(r, c)) > std::fabs(at(piv, c))) piv = r;
        pivot_[c] = piv;
        if (piv != c)
            for (int j = 0; j < d; ++j) std::swap(at(c, j), at(piv, j));
        if (at(c, c) == 0.0)
            throw ConfigError("StarSimplex: vertices are affinely dependent");
        for (int r = c + 1; r < d; ++r) {
            at(r, c) /= at(c, c);
            for (int j = c + 1; j < d; ++j) at(r, j) -= at(r, c) * at(c, j);
        }
    }
}

std::vector<double> UncertaintySet::barycentric(const SamplePoint& x) const {
    const auto& s = std::get<StarSimplex>(variant_);
    const int d = dim_;
    auto at = [&](int r, int c) -> double { return lu_[static_cast<std::size_t>(c) * d + r]; };

    std::vector<double> y(d);
    for (int i = 0; i < d; ++i) y[i] = x[i] - s.vertices[0][i];
    for (int c = 0; c < d; ++c) {
        if (pivot_[c] != c) std::swap(y[c], y[pivot_[c]]);
        for (int r = c + 1; r < d; ++r) y[r] -= at(r, c) * y[c];
    }
    for (int c = d - 1; c >= 0; --c) {
        for (int j = c + 1; j < d; ++j) y[c] -= at(c, j) * y[j];
        y[c] /= at(c, c);
    }

    std::vector<double> lambda(d + 1);
    double rest = 0.0;
    for (int i = 0; i < d; ++i) {
        lambda[i + 1] = y[i];
        rest += y[i];
    }
    lambda[0] = 1.0 - rest;
    return lambda;
}

namespace {

// Coordinate with density proportional to exp(-|t|^p); |t| = G^(1/p) with
// G ~ Gamma(1/p). Combined with the U^(1/dim) radial factor this samples the
// lp ball uniformly.
double generalized_gaussian(double p, RngStream& rng) {
    const double mag = std::pow(rng.gamma(1.0 / p), 1.0 / p);
    return rng.next_u64() & 1u ? mag : -mag;
}

// p-norm factored through the max coordinate so |c|^p cannot overflow for
// large norm orders.
double lp_norm(const SamplePoint& x, double p) {
    double m = 0.0;
    for (double c : x) m = std::max(m, std::fabs(c));
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (double c : x) s += std::pow(std::fabs(c) / m, p);
    return m * std::pow(s, 1.0 / p);
}

} // namespace

SamplePoint UncertaintySet::sample_uniform(double r, RngStream& rng) const {
    if (!(r > 0.0)) throw ConfigError("sample_uniform: radius must be > 0, got " + std::to_string(r));

    if (const auto* lp = std::get_if<LpBall>(&variant_)) {
        if (std::isinf(lp->p)) {
            SamplePoint x(dim_);
            for (auto& c : x) c = rng.uniform(-r, r);
            return x;
        }
        SamplePoint g(dim_);
        double norm_p = 0.0;
        do {
            for (auto& c : g) c = generalized_gaussian(lp->p, rng);
            norm_p = lp_norm(g, lp->p);
        } while (norm_p == 0.0);
        const double scale = r * std::pow(rng.next_double(), 1.0 / dim_) / norm_p;
        for (auto& c : g) c *= scale;
        return g;
    }

    if (std::get_if<Box>(&variant_)) {
        SamplePoint x(dim_);
        for (auto& c : x) c = rng.uniform(-r, r);
        return x;
    }

    if (const auto* sp = std::get_if<ScalarBlockSpectral>(&variant_)) {
        SamplePoint x;
        x.reserve(dim_);
        for (const auto& blk : sp->blocks) {
            if (blk.field == BlockField::Real) {
                x.push_back(rng.uniform(-r, r));
            } else {
                // uniform over the radius-r disc
                const double rho = r * std::sqrt(rng.next_double());
                const double phi = 2.0 * 3.14159265358979323846 * rng.next_double();
                x.push_back(rho * std::cos(phi));
                x.push_back(rho * std::sin(phi));
            }
        }
        return x;
    }

    // StarSimplex: symmetric Dirichlet weights give a uniform point of the
    // unit simplex; the affine contraction about the center has constant
    // Jacobian, so uniformity carries over to radius r.
    const auto& sx = std::get<StarSimplex>(variant_);
    const int m = dim_ + 1;
    std::vector<double> w(m);
    double total = 0.0;
    do {
        total = 0.0;
        for (auto& wi : w) {
            wi = -std::log(rng.next_double_pos());
            total += wi;
        }
    } while (total == 0.0);
    SamplePoint x(dim_, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < dim_; ++j) x[j] += (w[i] / total) * sx.vertices[i][j];
    for (int j = 0; j < dim_; ++j) x[j] = r * (x[j] - center_[j]) + center_[j];
    return x;
}

double UncertaintySet::size_of(const SamplePoint& x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw ConfigError("size_of: point dimension " + std::to_string(x.size()) +
                          " does not match set dimension " + std::to_string(dim_));

    if (const auto* lp = std::get_if<LpBall>(&variant_)) {
        if (std::isinf(lp->p)) {
            double m = 0.0;
            for (double c : x) m = std::max(m, std::fabs(c));
            return m;
        }
        return lp_norm(x, lp->p);
    }

    if (std::get_if<Box>(&variant_)) {
        double m = 0.0;
        for (double c : x) m = std::max(m, std::fabs(c));
        return m;
    }

    if (const auto* sp = std::get_if<ScalarBlockSpectral>(&variant_)) {
        // Spectral norm of the block-diagonal matrix = max scalar modulus.
        double m = 0.0;
        std::size_t i = 0;
        for (const auto& blk : sp->blocks) {
            if (blk.field == BlockField::Real) {
                m = std::max(m, std::fabs(x[i]));
                i += 1;
            } else {
                m = std::max(m, std::hypot(x[i], x[i + 1]));
                i += 2;
            }
        }
        return m;
    }

    // StarSimplex: with lambda the barycentric coordinates of x, the point
    // (x - c)/r + c lies in the simplex iff every contracted coordinate
    // 1/(d+1) + (lambda_i - 1/(d+1))/r stays nonnegative, which rearranges to
    // r >= 1 - (d+1) * min_i lambda_i.
    const auto lambda = barycentric(x);
    const double lmin = *std::min_element(lambda.begin(), lambda.end());
    return std::max(0.0, 1.0 - static_cast<double>(dim_ + 1) * lmin);
}

} // namespace robustmc::uncertainty
