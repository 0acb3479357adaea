#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "waist/errors.hpp"
#include "waist/linalg.hpp"
#include "waist/parallel.hpp"
#include "waist/rng.hpp"

namespace waist {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 1.57079632679489661923;

/// A point of S^n stored as n+1 Cartesian coordinates of unit norm.
/// Also used as the oriented normal of a cutting hypersphere.
class UnitVector {
public:
    /// Wraps coordinates that are already unit length (within 1e-12).
    explicit UnitVector(std::vector<double> coords) : c_(std::move(coords)) {
        if (c_.size() < 2) throw DimMismatch{};
        if (std::fabs(norm(c_) - 1.0) > 1e-12) throw ZeroVector{};
    }

    /// Radial projection of a raw vector onto the sphere.
    static UnitVector normalized(std::vector<double> raw) {
        const double n = norm(raw);
        if (n < 1e-300) throw ZeroVector{};
        scale_inplace(raw, 1.0 / n);
        return UnitVector(std::move(raw), unchecked_tag{});
    }

    static UnitVector axis(std::size_t i, int dim) {
        std::vector<double> c(static_cast<std::size_t>(dim) + 1, 0.0);
        c.at(i) = 1.0;
        return UnitVector(std::move(c), unchecked_tag{});
    }

    int dim() const { return static_cast<int>(c_.size()) - 1; }
    std::span<const double> coords() const { return c_; }
    double operator[](std::size_t i) const { return c_[i]; }

    UnitVector negated() const {
        std::vector<double> c = c_;
        for (double& x : c) x = -x;
        return UnitVector(std::move(c), unchecked_tag{});
    }

    bool operator==(const UnitVector& o) const { return c_ == o.c_; }

private:
    struct unchecked_tag {};
    UnitVector(std::vector<double> coords, unchecked_tag) : c_(std::move(coords)) {}

    std::vector<double> c_;
};

inline UnitVector normalize(std::vector<double> raw) { return UnitVector::normalized(std::move(raw)); }

inline double dot(const UnitVector& a, const UnitVector& b) {
    if (a.dim() != b.dim()) throw DimMismatch{};
    return dot(a.coords(), b.coords());
}

/// Geodesic (angular) distance in [0, pi]. Dot products are clamped to
/// [-1, 1] so numerical antipodes or coincidences never produce NaN.
inline double geodesic_distance(const UnitVector& a, const UnitVector& b) {
    return std::acos(clamp_unit(dot(a, b)));
}

/// Exponential-map point cos(t) center + sin(t) u, for u tangent at center.
inline UnitVector polar_coordinates(const UnitVector& center, double t, const UnitVector& u) {
    if (center.dim() != u.dim()) throw DimMismatch{};
    if (std::fabs(dot(center, u)) > 1e-9) throw NotTangent{};
    if (t < 0.0 || t > 3.14159265358979323846 + 1e-12) throw OutOfDomain{};
    std::vector<double> c(center.coords().begin(), center.coords().end());
    scale_inplace(c, std::cos(t));
    axpy(std::sin(t), u.coords(), c);
    return normalize(std::move(c));
}

/// Center map: radial projection of the weighted Euclidean mean. Continuous
/// on families of sets contained in an open hemisphere.
inline UnitVector spherical_centroid(std::span<const UnitVector> points,
                                     std::span<const double> weights) {
    if (points.empty() || points.size() != weights.size()) throw DimMismatch{};
    const std::size_t d = points[0].coords().size();
    std::vector<double> mean(d, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].coords().size() != d) throw DimMismatch{};
        if (weights[i] < 0.0) throw OutOfDomain{};
        axpy(weights[i], points[i].coords(), mean);
        total += weights[i];
    }
    if (total <= 0.0) throw DegenerateMean{};
    scale_inplace(mean, 1.0 / total);
    if (norm(mean) <= 1e-9) throw DegenerateMean{};
    return normalize(std::move(mean));
}

/// Uniform sample from the normalized Riemannian measure on S^n.
inline UnitVector sample_uniform(RngStream& rng, int n) {
    if (n < 1) throw DimMismatch{};
    std::vector<double> c(static_cast<std::size_t>(n) + 1);
    for (;;) {
        for (double& x : c) x = rng.next_normal();
        if (norm(c) > 1e-12) break;
    }
    return normalize(std::move(c));
}

namespace detail {

/// Fills `out` (count * (n+1) doubles) with uniform sphere points.
inline void fill_uniform_cloud(RngStream& rng, int n, std::size_t count, double* out) {
    const std::size_t d = static_cast<std::size_t>(n) + 1;
    for (std::size_t s = 0; s < count; ++s) {
        double* p = out + s * d;
        double nn = 0.0;
        do {
            nn = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                p[i] = rng.next_normal();
                nn += p[i] * p[i];
            }
        } while (nn < 1e-24);
        const double inv = 1.0 / std::sqrt(nn);
        for (std::size_t i = 0; i < d; ++i) p[i] *= inv;
    }
}

}  // namespace detail

/// Deterministic uniform cloud on S^n: chunk c draws from stream
/// (root_seed, stream_base + c), so the result is schedule-independent.
inline std::vector<double> uniform_cloud(std::uint64_t root_seed, std::uint64_t stream_base,
                                         int n, std::size_t count, int width = 1) {
    const std::size_t d = static_cast<std::size_t>(n) + 1;
    const std::size_t chunk = 1u << 15;
    const std::size_t chunks = (count + chunk - 1) / chunk;
    std::vector<double> cloud(count * d);
    run_chunks(chunks, width, [&](std::size_t c) {
        RngStream rng(root_seed, stream_base + c);
        const std::size_t lo = c * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        detail::fill_uniform_cloud(rng, n, hi - lo, cloud.data() + lo * d);
    });
    return cloud;
}

}  // namespace waist
