// rng.hpp -- counter-based, splittable random number stream.
//
// Every stream is a pure function of (seed, path, counter), so a substream
// keyed by e.g. (radius index, trial index) produces the same draws no matter
// which thread evaluates it or in which order. Derivation and output both use
// the splitmix64 finalizer.
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace robustmc {

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : key_(derive(golden_, seed)) {}

    RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
        : RngStream(seed) {
        for (std::uint64_t p : path) key_ = derive(key_, p);
    }

    // Child stream; independent of the parent's counter position.
    RngStream substream(std::uint64_t id) const {
        RngStream child(*this);
        child.key_ = derive(key_, id);
        child.counter_ = 0;
        return child;
    }
    RngStream substream(std::uint64_t a, std::uint64_t b) const {
        return substream(a).substream(b);
    }

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * golden_); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; never returns 0 (safe as a log/pow argument).
    double next_double_pos() { return 1.0 - next_double(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal via the Marsaglia polar method.
    double normal() {
        for (;;) {
            const double u = 2.0 * next_double() - 1.0;
            const double v = 2.0 * next_double() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    // Gamma(shape, 1) via Marsaglia-Tsang, with the usual boost for shape < 1.
    double gamma(double shape) {
        if (shape < 1.0)
            return gamma(shape + 1.0) * std::pow(next_double_pos(), 1.0 / shape);
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            const double x = normal();
            const double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            const double v = t * t * t;
            const double u = next_double_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

  private:
    static constexpr std::uint64_t golden_ = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }
    static std::uint64_t derive(std::uint64_t key, std::uint64_t id) {
        return mix64(key ^ mix64(id + golden_));
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace robustmc
