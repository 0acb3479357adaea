#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "waist/errors.hpp"
#include "waist/kdtree.hpp"
#include "waist/maps.hpp"
#include "waist/measure.hpp"
#include "waist/parallel.hpp"
#include "waist/partition.hpp"
#include "waist/rng.hpp"

namespace waist {

/// Shared phase-1 material: a uniform cloud on S^n with precomputed map
/// values, plus an index over the value space for fast slab extraction.
class MapCloud {
public:
    MapCloud(const MapSpec& map, std::size_t samples, std::uint64_t seed,
             std::uint64_t stream_base = 40000, int width = 1)
        : n_(map.n), k_(map.k), count_(samples) {
        pts_ = uniform_cloud(seed, stream_base, n_, samples, width);
        fvals_.resize(samples * static_cast<std::size_t>(k_));
        const std::size_t d = static_cast<std::size_t>(n_) + 1;
        for (std::size_t s = 0; s < samples; ++s)
            map.eval(std::span<const double>(pts_.data() + s * d, d),
                     std::span<double>(fvals_.data() + s * static_cast<std::size_t>(k_),
                                       static_cast<std::size_t>(k_)));
        if (k_ == 1) {
            order_.resize(samples);
            for (std::size_t s = 0; s < samples; ++s) order_[s] = static_cast<std::uint32_t>(s);
            std::sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) {
                return fvals_[a] < fvals_[b] || (fvals_[a] == fvals_[b] && a < b);
            });
        } else {
            // bucket samples by value cell for O(slab) extraction
            for (std::uint32_t s = 0; s < samples; ++s)
                grid_[cell_key(value(s))].push_back(s);
        }
    }

    int n() const { return n_; }
    int k() const { return k_; }
    std::size_t count() const { return count_; }
    const std::vector<double>& points() const { return pts_; }
    const double* point(std::uint32_t s) const {
        return pts_.data() + static_cast<std::size_t>(s) * (static_cast<std::size_t>(n_) + 1);
    }
    const double* value(std::uint32_t s) const {
        return fvals_.data() + static_cast<std::size_t>(s) * static_cast<std::size_t>(k_);
    }

    std::vector<double> value_min() const { return reduce(true); }
    std::vector<double> value_max() const { return reduce(false); }

    /// Indices of samples with |f - z| <= delta (Euclidean in R^k),
    /// in increasing sample order.
    std::vector<std::uint32_t> slab(std::span<const double> z, double delta) const {
        std::vector<std::uint32_t> out;
        if (k_ == 1) {
            const auto lo = std::lower_bound(order_.begin(), order_.end(), z[0] - delta,
                                             [&](std::uint32_t a, double v) { return fvals_[a] < v; });
            const auto hi = std::upper_bound(order_.begin(), order_.end(), z[0] + delta,
                                             [&](double v, std::uint32_t a) { return v < fvals_[a]; });
            out.assign(lo, hi);
            std::sort(out.begin(), out.end());
            return out;
        }
        const double d2 = delta * delta;
        const long span = static_cast<long>(std::ceil(delta / kCell)) + 1;
        const long c0 = static_cast<long>(std::floor(z[0] / kCell));
        const long c1 = static_cast<long>(std::floor(z[1] / kCell));
        for (long a = c0 - span; a <= c0 + span; ++a)
            for (long b = c1 - span; b <= c1 + span; ++b) {
                const auto it = grid_.find(pack(a, b));
                if (it == grid_.end()) continue;
                for (std::uint32_t s : it->second) {
                    const double* f = value(s);
                    const double d0 = f[0] - z[0];
                    const double d1 = f[1] - z[1];
                    if (d0 * d0 + d1 * d1 <= d2) out.push_back(s);
                }
            }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::vector<double> reduce(bool want_min) const {
        std::vector<double> out(static_cast<std::size_t>(k_),
                                want_min ? 1e300 : -1e300);
        for (std::uint32_t s = 0; s < count_; ++s)
            for (int j = 0; j < k_; ++j) {
                const double v = value(s)[j];
                auto& o = out[static_cast<std::size_t>(j)];
                o = want_min ? std::min(o, v) : std::max(o, v);
            }
        return out;
    }

    static constexpr double kCell = 0.01;

    static long long pack(long a, long b) { return static_cast<long long>(a) * 4194304ll + b; }

    long long cell_key(const double* f) const {
        return pack(static_cast<long>(std::floor(f[0] / kCell)),
                    static_cast<long>(std::floor(f[1] / kCell)));
    }

    int n_, k_;
    std::size_t count_;
    std::vector<double> pts_, fvals_;
    std::vector<std::uint32_t> order_;
    std::map<long long, std::vector<std::uint32_t>> grid_;
};

struct FiberTube {
    double fraction = 0.0;
    double sigma = 0.0;
    std::size_t slab_count = 0;
};

/// Phase 2 of the estimator against shared clouds: the slab cloud proxies
/// the fiber, and the tube fraction is the share of query points within
/// geodesic eps of it (chord radius 2 sin(eps/2), so the kd-tree works in
/// the ambient chord metric).
inline FiberTube fiber_tube_from_cloud(const MapCloud& cloud, std::span<const double> z,
                                       double eps, double delta,
                                       std::span<const double> queries) {
    const std::vector<std::uint32_t> slab = cloud.slab(z, delta);
    if (slab.empty()) throw EmptySlab{};
    const std::size_t d = static_cast<std::size_t>(cloud.n()) + 1;
    std::vector<double> slab_pts;
    slab_pts.reserve(slab.size() * d);
    for (std::uint32_t s : slab) slab_pts.insert(slab_pts.end(), cloud.point(s), cloud.point(s) + d);
    const KdTree tree(std::move(slab_pts), static_cast<int>(d));
    const double chord = 2.0 * std::sin(0.5 * std::min(eps, kPi));
    const std::size_t m = queries.size() / d;
    long hits = 0;
    for (std::size_t q = 0; q < m; ++q)
        if (tree.any_within(queries.subspan(q * d, d), chord)) ++hits;
    FiberTube out;
    out.fraction = static_cast<double>(hits) / static_cast<double>(m);
    out.sigma = std::sqrt(out.fraction * (1.0 - out.fraction) / static_cast<double>(m));
    out.slab_count = slab.size();
    return out;
}

/// Standalone two-phase estimate of vol(f^-1(z) + eps) / vol(S^n).
inline FiberTube fiber_tube_volume(const MapSpec& map, std::span<const double> z, double eps,
                                   double delta, std::size_t phase1, std::size_t phase2,
                                   std::uint64_t seed, int width = 1) {
    const MapCloud cloud(map, phase1, seed, 40000, width);
    const std::vector<double> queries = uniform_cloud(seed, 41000, map.n, phase2, width);
    return fiber_tube_from_cloud(cloud, z, eps, delta, queries);
}

struct WaistRow {
    std::vector<double> z;
    double fraction = 0.0;
    double sigma = 0.0;
    std::size_t slab_count = 0;
};

struct WaistOptions {
    std::size_t phase1 = 0;         // slab-source samples; 0 picks a per-k default
    std::size_t phase2 = 0;         // query samples; 0 picks a per-k default
    double delta = 0.0;             // slab half-width; 0 picks the default
    double grid_res = 0.0;          // z-grid resolution; 0 means eps / 4
    std::uint64_t seed = 12345;
    int threads = 1;
};

struct WaistReport {
    std::string map_name;
    int n = 2, k = 1;
    double eps = 0.5;
    double delta = 0.0;
    double grid_res = 0.0;
    std::vector<WaistRow> rows;
    std::vector<double> argmax_z;
    double max_fraction = 0.0;
    double sigma_at_max = 0.0;
    double bound = 0.0;
    double gap = 0.0;  // max_fraction - bound
    std::size_t skipped = 0;
    std::uint64_t seed = 0;
    std::size_t phase1 = 0, phase2 = 0;
};

/// Default slab half-width. For one-dimensional values the thin eps/50 slab
/// keeps the one-sided bias near cos(eps) eps/50 while still catching enough
/// samples; k = 2 slabs collect quadratically fewer points, so the width is
/// pinned at 0.01 and the phase-1 budget raised instead.
inline double default_slab_delta(int k, double eps) {
    if (k == 1) return eps / 50.0;
    return std::min(0.01, eps / 10.0);
}

inline std::size_t default_phase1(int k) { return k == 1 ? 1000000u : 4000000u; }

/// Scans a z-grid over the sampled range of f, refines once around the
/// running maximum, then re-measures the best z with an eightfold query
/// budget. gap = max_fraction - tube_fraction(n, k, eps).
inline WaistReport waist_estimate(const MapSpec& map, double eps, const WaistOptions& opt) {
    WaistReport rep;
    rep.map_name = map.name();
    rep.n = map.n;
    rep.k = map.k;
    rep.eps = eps;
    rep.delta = opt.delta > 0.0 ? opt.delta : default_slab_delta(map.k, eps);
    rep.grid_res = opt.grid_res > 0.0 ? opt.grid_res : eps / 4.0;
    rep.seed = opt.seed;
    rep.phase1 = opt.phase1 ? opt.phase1 : default_phase1(map.k);
    rep.phase2 = opt.phase2 ? opt.phase2 : (map.k == 1 ? 80000 : 20000);

    const MapCloud cloud(map, rep.phase1, opt.seed, 40000, opt.threads);
    const std::vector<double> queries =
        uniform_cloud(opt.seed, 41000, map.n, rep.phase2, opt.threads);

    const std::vector<double> lo = cloud.value_min();
    const std::vector<double> hi = cloud.value_max();
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(map.k));
    for (int j = 0; j < map.k; ++j) {
        const double margin = rep.delta;
        const long m_lo = static_cast<long>(
            std::floor((lo[static_cast<std::size_t>(j)] - margin) / rep.grid_res));
        const long m_hi = static_cast<long>(
            std::ceil((hi[static_cast<std::size_t>(j)] + margin) / rep.grid_res));
        for (long m = m_lo; m <= m_hi; ++m)
            axes[static_cast<std::size_t>(j)].push_back(static_cast<double>(m) * rep.grid_res);
    }
    std::vector<std::vector<double>> zs;
    if (map.k == 1) {
        for (double z : axes[0]) zs.push_back({z});
    } else {
        for (double z0 : axes[0])
            for (double z1 : axes[1]) zs.push_back({z0, z1});
    }

    auto evaluate = [&](const std::vector<std::vector<double>>& pts,
                        std::vector<std::optional<WaistRow>>& out) {
        out.assign(pts.size(), std::nullopt);
        run_chunks(pts.size(), opt.threads, [&](std::size_t i) {
            try {
                const FiberTube ft = fiber_tube_from_cloud(cloud, pts[i], eps, rep.delta, queries);
                out[i] = WaistRow{pts[i], ft.fraction, ft.sigma, ft.slab_count};
            } catch (const EmptySlab&) {
            }
        });
    };

    std::vector<std::optional<WaistRow>> rows;
    evaluate(zs, rows);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i]) {
            ++rep.skipped;
            continue;
        }
        rep.rows.push_back(*rows[i]);
        if (!best || rows[i]->fraction > rep.rows[*best].fraction)
            best = rep.rows.size() - 1;
    }
    if (!best) throw EmptySlab{};

    // one refinement pass around the running max
    const std::vector<double> center = rep.rows[*best].z;
    std::vector<std::vector<double>> fine;
    const double fres = rep.grid_res / 4.0;
    if (map.k == 1) {
        for (int a = -3; a <= 3; ++a)
            if (a != 0) fine.push_back({center[0] + a * fres});
    } else {
        for (int a = -3; a <= 3; ++a)
            for (int b = -3; b <= 3; ++b)
                if (a || b) fine.push_back({center[0] + a * fres, center[1] + b * fres});
    }
    evaluate(fine, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i]) continue;
        rep.rows.push_back(*rows[i]);
        if (rows[i]->fraction > rep.rows[*best].fraction) best = rep.rows.size() - 1;
    }

    // re-measure the winner with a larger query cloud to pin the max
    rep.argmax_z = rep.rows[*best].z;
    const std::vector<double> big_queries =
        uniform_cloud(opt.seed, 42000, map.n, rep.phase2 * 8, opt.threads);
    const FiberTube fin =
        fiber_tube_from_cloud(cloud, rep.argmax_z, eps, rep.delta, big_queries);
    rep.max_fraction = fin.fraction;
    rep.sigma_at_max = fin.sigma;
    rep.bound = tube_fraction(map.n, map.k, eps);
    rep.gap = rep.max_fraction - rep.bound;
    return rep;
}

/// Slab-bias coefficient calibrated on the projection map, where the exact
/// tube volume is the closed-form bound: c = max(0, gap) / delta.
inline double calibrate_slab_bias(int n, int k, double eps, const WaistOptions& opt) {
    MapSpec proj{MapSpec::Kind::projection, n, k};
    const WaistReport rep = waist_estimate(proj, eps, opt);
    return std::max(0.0, rep.gap) / rep.delta;
}

struct TheoremCheck {
    double max_fraction = 0.0;
    double bound = 0.0;
    double allowance = 0.0;
    bool pass = false;
};

/// The waist inequality at one (map, eps): max_z tube >= bound - allowance,
/// allowance = 4 sigma + bias_coef * delta (one-sided slab bias).
inline TheoremCheck theorem_check(const WaistReport& rep, double bias_coef) {
    TheoremCheck out;
    out.max_fraction = rep.max_fraction;
    out.bound = rep.bound;
    out.allowance = 4.0 * rep.sigma_at_max + bias_coef * rep.delta;
    out.pass = rep.max_fraction >= rep.bound - out.allowance;
    return out;
}

struct DegradationRow {
    double delta = 0.0;      // uniform distance bound between the two maps
    double sup_norm = 0.0;   // sampled ||f - g||_inf
    double max_f = 0.0;
    double max_g = 0.0;
    double diff = 0.0;       // |max_g - max_f|
};

/// Waist degradation under uniform perturbation: runs the estimator on f and
/// on g_delta = f + delta-size perturbation for each delta, recording how the
/// max tube fraction drifts. The drift vanishes as delta -> 0.
inline std::vector<DegradationRow> continuity_degradation(const MapSpec& base,
                                                          std::span<const double> deltas,
                                                          double eps, const WaistOptions& opt) {
    const WaistReport rf = waist_estimate(base, eps, opt);
    std::vector<DegradationRow> rows;
    for (double delta : deltas) {
        MapSpec g = base;
        g.kind = MapSpec::Kind::perturbed;
        g.eta = delta;
        g.freq = 3.0;
        DegradationRow row;
        row.delta = delta;
        // sampled sup distance between the maps
        RngStream rng(opt.seed, 47000);
        for (int s = 0; s < 20000; ++s) {
            const UnitVector x = sample_uniform(rng, base.n);
            const std::vector<double> a = base(x), b = g(x);
            double dmax = 0.0;
            for (std::size_t j = 0; j < a.size(); ++j)
                dmax = std::max(dmax, std::fabs(a[j] - b[j]));
            row.sup_norm = std::max(row.sup_norm, dmax);
        }
        const WaistReport rg = waist_estimate(g, eps, opt);
        row.max_f = rf.max_fraction;
        row.max_g = rg.max_fraction;
        row.diff = std::fabs(row.max_g - row.max_f);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace waist
