#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "waist/measure.hpp"
#include "waist/partition.hpp"
#include "waist/rng.hpp"
#include "waist/sphere.hpp"

namespace waist {

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

/// Random k=1 measure: random great circle, min-of-cosines density with all
/// phases inside the arc's positivity region.
inline KDimMeasure random_arc_measure(RngStream& rng, int n) {
    auto basis = random_orthonormal(rng, static_cast<std::size_t>(n) + 1, 2);
    const int nlines = 1 + static_cast<int>(rng.next_double() * 3.0);
    std::vector<std::array<double, 3>> fun;
    double min_phase = 10.0, max_phase = -10.0;
    for (int j = 0; j < nlines; ++j) {
        const double phase = -0.5 + rng.next_double();
        const double radius = 0.5 + 1.5 * rng.next_double();
        fun.push_back({radius * std::cos(phase), radius * std::sin(phase), 0.0});
        min_phase = std::min(min_phase, phase);
        max_phase = std::max(max_phase, phase);
    }
    const double lo = max_phase - kHalfPi + 0.05;
    const double hi = min_phase + kHalfPi - 0.05;
    const double t0 = lo + (hi - lo) * 0.45 * rng.next_double();
    const double t1 = hi - (hi - lo) * 0.45 * rng.next_double();
    return KDimMeasure::arc(n, std::move(basis), t0, t1, std::move(fun));
}

/// Random k=2 measure: a convex spherical polygon around the local north
/// pole, density functionals tilted mildly so they stay positive on it.
inline KDimMeasure random_polygon_measure(RngStream& rng, int n, int angular_nodes = 1024) {
    auto basis = random_orthonormal(rng, static_cast<std::size_t>(n) + 1, 3);
    const int nedges = 3 + static_cast<int>(rng.next_double() * 3.0);
    std::vector<std::array<double, 3>> edges;
    for (int s = 0; s < nedges; ++s) {
        const double psi = 2.0 * kPi * (s + 0.3 + 0.4 * rng.next_double()) / nedges;
        const double alpha = 0.25 + 0.3 * rng.next_double();  // boundary at ~alpha from pole
        edges.push_back({std::cos(alpha) * std::cos(psi), std::cos(alpha) * std::sin(psi),
                         std::sin(alpha)});
    }
    const int nfun = 1 + static_cast<int>(rng.next_double() * 3.0);
    std::vector<std::array<double, 3>> fun;
    for (int j = 0; j < nfun; ++j)
        fun.push_back({-0.3 + 0.6 * rng.next_double(), -0.3 + 0.6 * rng.next_double(),
                       0.8 + 0.7 * rng.next_double()});
    return KDimMeasure::polygon(n, std::move(basis), std::move(edges), std::move(fun),
                                angular_nodes);
}

/// The extremal k=1 instance: density cos^(n-1) on a half-circle about its
/// maximum, which turns the ball-mass lower bound into an equality.
inline KDimMeasure extremal_arc_measure(int n) {
    std::vector<std::vector<double>> basis;
    basis.push_back(std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    basis.push_back(std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    basis[0][0] = 1.0;
    basis[1][1] = 1.0;
    return KDimMeasure::arc(n, std::move(basis), -kHalfPi, kHalfPi, {{1.0, 0.0, 0.0}});
}

// ---------------------------------------------------------------------------
// Bishop-Gromov
// ---------------------------------------------------------------------------

struct BishopRow {
    double r = 0.0;
    double ratio = 0.0;       // vol(cell n B) / vol(B)
    double sigma_ratio = 0.0;
    double cell_ball = 0.0;   // vol(cell n B) / vol(S^n)
    double ball = 0.0;        // vol(B) / vol(S^n)
};

struct BishopResult {
    bool monotone = true;
    bool lower_bound = true;
    double cell_volume = 0.0;
    std::vector<BishopRow> rows;
    bool pass() const { return monotone && lower_bound; }
};

/// Checks on one convex cell that r -> vol(cell n B(x,r)) / vol(B(x,r)) is
/// nonincreasing within 4 sigma and that the cell-relative ball mass is at
/// least the global one.
inline BishopResult bishop_gromov_check(const ConvexCell& cell, const UnitVector& x,
                                        std::span<const double> r_grid, std::size_t samples,
                                        std::uint64_t seed, int width = 1) {
    const int n = cell.constraints.empty() ? x.dim() : cell.constraints[0].first.dim();
    const std::size_t d = static_cast<std::size_t>(n) + 1;
    const std::vector<double> cloud = uniform_cloud(seed, 1700, n, samples, width);

    long in_cell = 0;
    std::vector<long> in_ball(r_grid.size(), 0), in_both(r_grid.size(), 0);
    std::vector<double> cos_r(r_grid.size());
    for (std::size_t j = 0; j < r_grid.size(); ++j) cos_r[j] = std::cos(r_grid[j]);
    for (std::size_t s = 0; s < samples; ++s) {
        std::span<const double> y(cloud.data() + s * d, d);
        const bool c = cell.contains(y);
        const double xy = dot(x.coords(), y);
        if (c) ++in_cell;
        for (std::size_t j = 0; j < r_grid.size(); ++j) {
            if (xy >= cos_r[j]) {
                ++in_ball[j];
                if (c) ++in_both[j];
            }
        }
    }

    const double N = static_cast<double>(samples);
    BishopResult out;
    out.cell_volume = in_cell / N;
    const double sig_cell = std::sqrt(out.cell_volume * (1 - out.cell_volume) / N);
    for (std::size_t j = 0; j < r_grid.size(); ++j) {
        BishopRow row;
        row.r = r_grid[j];
        row.ball = in_ball[j] / N;
        row.cell_ball = in_both[j] / N;
        const double sa = std::sqrt(row.cell_ball * (1 - row.cell_ball) / N);
        const double sb = std::sqrt(row.ball * (1 - row.ball) / N);
        if (in_ball[j] == 0) continue;
        row.ratio = row.cell_ball / row.ball;
        row.sigma_ratio = row.ratio * std::sqrt(sa * sa / (row.cell_ball * row.cell_ball + 1e-300) +
                                                sb * sb / (row.ball * row.ball));
        // lower bound: vol(cell n B) >= vol(B) vol(cell) within 4 sigma
        const double slack = 4.0 * std::sqrt(sa * sa + out.cell_volume * out.cell_volume * sb * sb +
                                             row.ball * row.ball * sig_cell * sig_cell);
        if (row.cell_ball < row.ball * out.cell_volume - slack) out.lower_bound = false;
        out.rows.push_back(row);
    }
    for (std::size_t j = 1; j < out.rows.size(); ++j) {
        const auto& a = out.rows[j - 1];
        const auto& b = out.rows[j];
        const double tol = 4.0 * std::sqrt(a.sigma_ratio * a.sigma_ratio +
                                           b.sigma_ratio * b.sigma_ratio);
        if (b.ratio > a.ratio + tol) out.monotone = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Generalized Prekopa-Leindler ball concavity (Euclidean model)
// ---------------------------------------------------------------------------

/// m-concave density on a box in R^d: phi = (max(0, min_j (b_j + g_j . x)))^m.
struct EuclideanDensity {
    int d = 2;
    double m = 1.0;
    std::vector<double> lo, hi;
    std::vector<std::pair<std::vector<double>, double>> affine;  // (g, b)

    double root(std::span<const double> x) const {
        double r = 0.0;
        bool first = true;
        for (const auto& [g, b] : affine) {
            const double s = b + dot(g, x);
            r = first ? s : std::min(r, s);
            first = false;
        }
        return r > 0.0 ? r : 0.0;
    }

    double density(std::span<const double> x) const { return std::pow(root(x), m); }
};

inline EuclideanDensity random_euclidean_density(RngStream& rng, int d) {
    EuclideanDensity phi;
    phi.d = d;
    phi.m = 0.5 + 2.5 * rng.next_double();
    phi.lo.assign(static_cast<std::size_t>(d), -1.0);
    phi.hi.assign(static_cast<std::size_t>(d), 1.0);
    const int naff = 1 + static_cast<int>(rng.next_double() * 2.0);
    for (int j = 0; j < naff; ++j) {
        std::vector<double> g(static_cast<std::size_t>(d));
        for (auto& c : g) c = -0.4 + 0.8 * rng.next_double();
        phi.affine.emplace_back(std::move(g), 1.0 + rng.next_double());
    }
    return phi;
}

struct GplRow {
    double theta = 0.0;
    double lhs = 0.0;   // mu(B(theta x + (1-theta) y, r))^(1/(m+d))
    double rhs = 0.0;   // theta-combination of endpoint masses
    double sigma = 0.0;
    bool pass = true;
};

/// Checks mu(B(. , r))^(1/(m+d)) is concave along the segment [x, y], within
/// 4 sigma of the weighted-ratio estimator.
inline std::vector<GplRow> ball_concavity_check(const EuclideanDensity& phi,
                                                std::span<const double> x,
                                                std::span<const double> y, double r,
                                                std::span<const double> thetas,
                                                std::size_t samples, RngStream& rng) {
    const std::size_t d = static_cast<std::size_t>(phi.d);
    std::vector<double> pts(samples * d), wts(samples);
    double wsum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t i = 0; i < d; ++i)
            pts[s * d + i] = phi.lo[i] + (phi.hi[i] - phi.lo[i]) * rng.next_double();
        wts[s] = phi.density(std::span<const double>(pts.data() + s * d, d));
        wsum += wts[s];
    }
    const double q = 1.0 / (phi.m + phi.d);

    auto ball_ratio = [&](std::span<const double> z, double& sigma_out) {
        double hit = 0.0, hit2 = 0.0;
        for (std::size_t s = 0; s < samples; ++s) {
            double dist2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double dd = pts[s * d + i] - z[i];
                dist2 += dd * dd;
            }
            if (dist2 <= r * r) {
                hit += wts[s];
                hit2 += wts[s] * wts[s];
            }
        }
        const double R = hit / wsum;
        // delta-method variance of the weighted ratio estimator
        double var = 0.0;
        for (std::size_t s = 0; s < samples; ++s) {
            double dist2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double dd = pts[s * d + i] - z[i];
                dist2 += dd * dd;
            }
            const double e = wts[s] * (((dist2 <= r * r) ? 1.0 : 0.0) - R);
            var += e * e;
        }
        sigma_out = std::sqrt(var) / wsum;
        return R;
    };

    double sx = 0, sy = 0;
    const double rx = ball_ratio(x, sx);
    const double ry = ball_ratio(y, sy);
    std::vector<GplRow> rows;
    for (double th : thetas) {
        std::vector<double> z(d);
        for (std::size_t i = 0; i < d; ++i) z[i] = th * x[i] + (1.0 - th) * y[i];
        double sz = 0;
        const double rz = ball_ratio(z, sz);
        GplRow row;
        row.theta = th;
        row.lhs = std::pow(rz, q);
        row.rhs = th * std::pow(rx, q) + (1.0 - th) * std::pow(ry, q);
        auto dpow = [&](double v, double s) {
            return v > 1e-12 ? q * std::pow(v, q - 1.0) * s : 0.0;
        };
        row.sigma = std::sqrt(std::pow(dpow(rz, sz), 2) + std::pow(th * dpow(rx, sx), 2) +
                              std::pow((1.0 - th) * dpow(ry, sy), 2));
        row.pass = row.lhs >= row.rhs - 4.0 * row.sigma - 1e-12;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Desintegration over a finite convex partition
// ---------------------------------------------------------------------------

using SetFn = std::function<bool(std::span<const double>)>;

inline SetFn make_cap(const UnitVector& center, double radius) {
    std::vector<double> c(center.coords().begin(), center.coords().end());
    const double cr = std::cos(radius);
    return [c = std::move(c), cr](std::span<const double> x) {
        return dot(std::span<const double>(c), x) >= cr;
    };
}

/// eps-tube of the equatorial S^(n-k) spanned by the first n-k+1 axes.
inline SetFn make_equatorial_tube(int k, double eps) {
    const double s2 = std::sin(eps) * std::sin(eps);
    return [k, s2](std::span<const double> x) {
        double tail = 0.0;
        for (std::size_t i = x.size() - static_cast<std::size_t>(k); i < x.size(); ++i)
            tail += x[i] * x[i];
        return tail <= s2;
    };
}

struct DesintResult {
    double lhs = 0.0;   // vol(A) / vol(S^n)
    double rhs = 0.0;   // sum over cells of vol-fraction * conditional mass
    double sigma = 0.0;
    bool pass = false;
};

/// Verifies vol(A)/vol(S^n) = sum_cells vol(cell)/vol(S^n) mu_cell(A) with
/// independent clouds on the two sides, within 5 sigma.
inline DesintResult desintegration_check(const OrientedPartition& p, const SetFn& in_A,
                                         std::size_t samples, std::uint64_t seed, int width = 1) {
    const int n = p.dim();
    const std::size_t d = static_cast<std::size_t>(n) + 1;
    const std::vector<double> cloud1 = uniform_cloud(seed, 2100, n, samples, width);
    const std::vector<double> cloud2 = uniform_cloud(seed, 2600, n, samples, width);
    const std::vector<double> normals = p.flat();
    const int leaves = p.leaf_count();

    long hitsA = 0;
    std::vector<long> vol_counts(static_cast<std::size_t>(leaves), 0);
    long accepted1 = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double* x = cloud1.data() + s * d;
        if (in_A(std::span<const double>(x, d))) ++hitsA;
        const int leaf = detail::cell_of_flat(x, normals.data(), p.depth(), static_cast<int>(d));
        if (leaf >= 0) {
            ++accepted1;
            ++vol_counts[static_cast<std::size_t>(leaf)];
        }
    }
    std::vector<long> cond_in(static_cast<std::size_t>(leaves), 0),
        cond_tot(static_cast<std::size_t>(leaves), 0);
    for (std::size_t s = 0; s < samples; ++s) {
        const double* x = cloud2.data() + s * d;
        const int leaf = detail::cell_of_flat(x, normals.data(), p.depth(), static_cast<int>(d));
        if (leaf < 0) continue;
        ++cond_tot[static_cast<std::size_t>(leaf)];
        if (in_A(std::span<const double>(x, d))) ++cond_in[static_cast<std::size_t>(leaf)];
    }

    DesintResult out;
    const double N = static_cast<double>(samples);
    out.lhs = hitsA / N;
    double var = out.lhs * (1 - out.lhs) / N;
    for (int leaf = 0; leaf < leaves; ++leaf) {
        const std::size_t l = static_cast<std::size_t>(leaf);
        if (cond_tot[l] == 0) continue;
        const double v = vol_counts[l] / static_cast<double>(accepted1);
        const double q = cond_in[l] / static_cast<double>(cond_tot[l]);
        out.rhs += v * q;
        const double sv = std::sqrt(v * (1 - v) / N);
        const double sq = std::sqrt(q * (1 - q) / static_cast<double>(cond_tot[l]));
        var += v * v * sq * sq + q * q * sv * sv;
    }
    out.sigma = std::sqrt(var);
    out.pass = std::fabs(out.lhs - out.rhs) <= 5.0 * out.sigma + 1e-12;
    return out;
}

// ---------------------------------------------------------------------------
// Empirical ball-mass argmax on a sample cloud
// ---------------------------------------------------------------------------

/// Approximate argmax set of x -> mu(B(x, r)) for an empirical measure.
/// Candidate starts are cloud points; ties are kept down to the estimator's
/// statistical resolution (uniform pieces of a measure make the true argmax
/// a whole region, and the tie set traces it). The barycenter of the
/// returned set is the r-center of the measure.
inline std::vector<UnitVector> argmax_ball_mass_cloud(std::span<const double> cloud, int dim1,
                                                      double r, int candidates = 2000) {
    const std::size_t d = static_cast<std::size_t>(dim1);
    const std::size_t count = cloud.size() / d;
    const double cr = std::cos(r);
    auto score = [&](std::span<const double> z) {
        long hits = 0;
        for (std::size_t s = 0; s < count; ++s)
            if (dot(z, std::span<const double>(cloud.data() + s * d, d)) >= cr) ++hits;
        return hits;
    };
    const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(candidates), count);
    std::vector<long> scores(m);
    long best = -1;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t pick = i * count / m;
        scores[i] = score(std::span<const double>(cloud.data() + pick * d, d));
        if (scores[i] > best) {
            best = scores[i];
            best_i = i;
        }
    }
    // Ties down to the estimator's resolution: the extreme-value spread of
    // plateau counts is a few sigma, so a 6-sigma window traces the whole
    // argmax region instead of its noise peaks.
    const double sigma = std::sqrt(static_cast<double>(best) *
                                   (1.0 - static_cast<double>(best) / static_cast<double>(count)));
    const long tie = best - static_cast<long>(std::ceil(
                                std::max(1e-4 * static_cast<double>(count), 6.0 * sigma)));
    std::vector<UnitVector> out;
    const std::size_t best_pick = best_i * count / m;
    out.push_back(normalize(std::vector<double>(cloud.data() + best_pick * d,
                                                cloud.data() + (best_pick + 1) * d)));
    for (std::size_t i = 0; i < m; ++i) {
        if (scores[i] < tie) continue;
        const std::size_t pick = i * count / m;
        out.push_back(normalize(
            std::vector<double>(cloud.data() + pick * d, cloud.data() + (pick + 1) * d)));
    }
    return out;
}

/// C_r center map on an empirical cloud: barycenter of the ball-mass argmax
/// set.
inline UnitVector ball_mass_center_cloud(std::span<const double> cloud, int dim1, double r,
                                         int candidates = 2000) {
    const std::vector<UnitVector> set = argmax_ball_mass_cloud(cloud, dim1, r, candidates);
    const std::vector<double> weights(set.size(), 1.0);
    return spherical_centroid(set, weights);
}

}  // namespace waist
