// uncertainty.hpp -- uncertainty bounding sets, uniform sampling, size function.
//
// A set describes the shape at radius 1; the radius-r member is the shape
// scaled by r (for the simplex type, contracted about its center). The size
// function ell(x) returns the smallest r whose set contains x, so
// x in B(r) <=> ell(x) <= r. Sampling at radius r is uniform with respect to
// the flat volume element (complex block scalars count area in the plane).
#pragma once

#include <cstdint>
#include <limits>
#include <variant>
#include <vector>

#include "robustmc/rng.hpp"

namespace robustmc::uncertainty {

// Coordinates of one uncertainty realization. Complex scalar-block entries
// occupy two consecutive slots (re, im).
using SamplePoint = std::vector<double>;

struct LpBall {
    double p = 2.0; // norm order, >= 1; infinity() means the max norm
    int dim = 1;
};

struct Box {
    int dim = 1;
};

enum class BlockField { Real, Complex };

struct ScalarBlock {
    BlockField field = BlockField::Real;
    int multiplicity = 1; // repetitions inside the block-diagonal structure
};

struct ScalarBlockSpectral {
    std::vector<ScalarBlock> blocks;
};

// Simplex star-shaped set: conv{vertices} contracted about its centroid.
// Vertices must be affinely independent; center is always the centroid.
struct StarSimplex {
    std::vector<SamplePoint> vertices; // dim+1 points of dimension dim
};

class UncertaintySet {
  public:
    using Variant = std::variant<LpBall, Box, ScalarBlockSpectral, StarSimplex>;

    explicit UncertaintySet(Variant v);

    // Number of real coordinates in a SamplePoint.
    int dim() const { return dim_; }

    const Variant& variant() const { return variant_; }

    SamplePoint sample_uniform(double r, RngStream& rng) const;

    // Smallest radius whose set contains x.
    double size_of(const SamplePoint& x) const;

    // Centroid for StarSimplex, origin otherwise.
    const SamplePoint& center() const { return center_; }

  private:
    Variant variant_;
    int dim_ = 0;
    SamplePoint center_;

    // StarSimplex only: LU factorization of the barycentric system.
    std::vector<double> lu_;
    std::vector<int> pivot_;

    void init_simplex(const StarSimplex& s);
    std::vector<double> barycentric(const SamplePoint& x) const;
};

constexpr double inf_norm = std::numeric_limits<double>::infinity();

} // namespace robustmc::uncertainty
