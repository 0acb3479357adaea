#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "waist/errors.hpp"
#include "waist/linalg.hpp"
#include "waist/maps.hpp"
#include "waist/nelder_mead.hpp"
#include "waist/parallel.hpp"
#include "waist/partition.hpp"
#include "waist/rng.hpp"
#include "waist/sphere.hpp"

namespace waist {

/// Per-node residual of the equalizing section: dv is the volume routed to
/// the side the node's normal points at minus the other side, dphi the same
/// difference of volume-weighted center images. A partition is a zero of the
/// section exactly when all cells have equal volume and all cell centers
/// share one image.
struct SectionValue {
    int depth = 1;
    int k = 1;
    std::vector<double> dv;                   // node-indexed, entry 0 unused
    std::vector<std::vector<double>> dphi;

    std::vector<double> packed() const {
        std::vector<double> out;
        out.reserve(dv.size() * static_cast<std::size_t>(k + 1));
        for (std::size_t m = 1; m < dv.size(); ++m) {
            out.push_back(dv[m]);
            for (double c : dphi[m]) out.push_back(c);
        }
        return out;
    }
};

inline double residual(const SectionValue& s) {
    double r = 0.0;
    for (std::size_t m = 1; m < s.dv.size(); ++m) {
        r += s.dv[m] * s.dv[m];
        for (double c : s.dphi[m]) r += c * c;
    }
    return std::sqrt(r);
}

struct SectionEval {
    SectionValue value;
    std::vector<double> volumes;                             // per leaf
    std::vector<std::optional<UnitVector>> centers;          // per leaf
    std::vector<std::optional<std::vector<double>>> images;  // f at centers
};

/// Evaluates the section on an explicit sample cloud. Using one shared cloud
/// across related evaluations makes comparisons deterministic (common random
/// numbers) and makes the automorphism equivariance exact up to summation
/// order.
inline SectionEval evaluate_section(const OrientedPartition& p, const MapFn& f, int k,
                                    std::span<const double> cloud) {
    const int leaves = p.leaf_count();
    SectionEval ev;
    const CellStats st = classify_cloud(p, cloud);
    ev.volumes.resize(static_cast<std::size_t>(leaves));
    ev.centers.resize(static_cast<std::size_t>(leaves));
    ev.images.resize(static_cast<std::size_t>(leaves));
    for (int leaf = 0; leaf < leaves; ++leaf) {
        ev.volumes[static_cast<std::size_t>(leaf)] = st.volume(leaf);
        ev.centers[static_cast<std::size_t>(leaf)] = st.center(leaf);
        if (ev.centers[static_cast<std::size_t>(leaf)])
            ev.images[static_cast<std::size_t>(leaf)] =
                f(*ev.centers[static_cast<std::size_t>(leaf)]);
    }
    const NodeAggregates agg = node_aggregates(p, f, k, ev.volumes, ev.centers);
    const int nodes = p.node_count();
    ev.value.depth = p.depth();
    ev.value.k = k;
    ev.value.dv.assign(static_cast<std::size_t>(nodes) + 1, 0.0);
    ev.value.dphi.assign(static_cast<std::size_t>(nodes) + 1,
                         std::vector<double>(static_cast<std::size_t>(k), 0.0));
    for (int m = 1; m <= nodes; ++m) {
        const std::size_t mm = static_cast<std::size_t>(m);
        ev.value.dv[mm] = agg.v_pos[mm] - agg.v_neg[mm];
        for (int j = 0; j < k; ++j)
            ev.value.dphi[mm][static_cast<std::size_t>(j)] =
                agg.phi_pos[mm][static_cast<std::size_t>(j)] -
                agg.phi_neg[mm][static_cast<std::size_t>(j)];
    }
    return ev;
}

/// Section evaluation with a fresh deterministic cloud.
inline SectionValue section_F(const OrientedPartition& p, const MapFn& f, int k, long samples,
                              std::uint64_t seed, std::uint64_t stream_base = 3000,
                              int width = 1) {
    const std::vector<double> cloud =
        uniform_cloud(seed, stream_base, p.dim(), static_cast<std::size_t>(samples), width);
    return evaluate_section(p, f, k, cloud).value;
}

struct SolveOptions {
    int restarts = 4;
    int max_iterations = 500;       // per restart, per sample tier
    double tolerance = 1e-3;
    long coarse_samples = 10000;    // until residual < 10 x tolerance
    long fine_samples = 1000000;
    long verify_samples = 0;        // 0: ten times fine_samples
    std::uint64_t root_seed = 12345;
    int threads = 1;
};

struct TraceRow {
    int restart = 0;
    int iteration = 0;
    double residual = 0.0;
    std::vector<double> volumes;
    std::vector<std::vector<double>> images;
};

struct SolveResult {
    std::optional<OrientedPartition> partition;
    bool converged = false;
    double residual_opt = 1e300;       // objective value at the optimizer tier
    double residual_verified = 1e300;  // independent re-verification
    std::vector<double> volumes;       // verified per-leaf fractions
    std::vector<std::optional<std::vector<double>>> images;
    double volume_gap = 1e300;         // max |v - 2^-i| over leaves (verified)
    double image_diameter = 1e300;     // diameter of {f(center)} (verified)
    std::vector<TraceRow> trace;
};

namespace detail {

/// Decodes one normal per node from raw parameter blocks. When a node has a
/// direction basis, the block holds coefficients in that basis; otherwise it
/// is a raw ambient vector. Returns nullopt when a block has negligible norm.
inline std::optional<OrientedPartition> decode_partition(
    std::span<const double> params, int depth, int ambient_dim,
    const std::vector<std::vector<std::vector<double>>>* node_bases) {
    const int nodes = (1 << depth) - 1;
    const std::size_t block =
        node_bases ? (*node_bases)[0].size() : static_cast<std::size_t>(ambient_dim) + 1;
    std::vector<UnitVector> normals;
    normals.reserve(static_cast<std::size_t>(nodes));
    for (int m = 0; m < nodes; ++m) {
        std::span<const double> c = params.subspan(static_cast<std::size_t>(m) * block, block);
        std::vector<double> raw(static_cast<std::size_t>(ambient_dim) + 1, 0.0);
        if (node_bases) {
            const auto& basis = (*node_bases)[static_cast<std::size_t>(m)];
            for (std::size_t l = 0; l < basis.size(); ++l) axpy(c[l], basis[l], raw);
        } else {
            raw.assign(c.begin(), c.end());
        }
        const double nn = norm(raw);
        if (nn < 1e-8) return std::nullopt;
        scale_inplace(raw, 1.0 / nn);
        normals.push_back(UnitVector(std::move(raw)));
    }
    return OrientedPartition(depth, std::move(normals));
}

struct RestartOutcome {
    std::vector<double> params;
    double residual = 1e300;
    std::vector<TraceRow> trace;
};

/// One objective over a fixed cloud (common random numbers): deterministic,
/// so the simplex comparisons are noise-consistent. The norm penalty keeps
/// the scale-invariant parameter blocks conditioned; it vanishes at unit
/// norm, which every zero can satisfy.
class SectionObjective {
public:
    SectionObjective(int depth, int ambient_dim, const MapFn& f, int k,
                     const std::vector<std::vector<std::vector<double>>>* node_bases,
                     const std::vector<double>* cloud, RestartOutcome* sink, int restart)
        : depth_(depth), ambient_(ambient_dim), f_(f), k_(k), bases_(node_bases), cloud_(cloud),
          sink_(sink), restart_(restart) {}

    double operator()(const std::vector<double>& x) const {
        auto p = decode_partition(x, depth_, ambient_, bases_);
        if (!p) return 1e6;
        const SectionEval ev = evaluate_section(*p, f_, k_, *cloud_);
        double obj = residual(ev.value);
        const int nodes = (1 << depth_) - 1;
        const std::size_t block = x.size() / static_cast<std::size_t>(nodes);
        for (int m = 0; m < nodes; ++m) {
            const double nn = norm(
                std::span<const double>(x.data() + static_cast<std::size_t>(m) * block, block));
            obj += 0.01 * (nn - 1.0) * (nn - 1.0);
        }
        if (sink_ && obj < best_seen_) {
            best_seen_ = obj;
            TraceRow row;
            row.restart = restart_;
            row.iteration = static_cast<int>(sink_->trace.size());
            row.residual = obj;
            row.volumes = ev.volumes;
            for (const auto& img : ev.images)
                row.images.push_back(img ? *img : std::vector<double>());
            sink_->trace.push_back(std::move(row));
        }
        return obj;
    }

private:
    int depth_, ambient_;
    const MapFn& f_;
    int k_;
    const std::vector<std::vector<std::vector<double>>>* bases_;
    const std::vector<double>* cloud_;
    RestartOutcome* sink_;
    int restart_;
    mutable double best_seen_ = 1e300;
};

inline SolveResult solve_impl(int depth, int ambient_dim, const MapFn& f, int k,
                              const SolveOptions& opt,
                              const std::vector<std::vector<std::vector<double>>>* node_bases) {
    if (depth < 1 || depth > 4) throw DepthTooLarge(depth);
    const int nodes = (1 << depth) - 1;
    const std::size_t block =
        node_bases ? (*node_bases)[0].size() : static_cast<std::size_t>(ambient_dim) + 1;
    const std::size_t nparams = static_cast<std::size_t>(nodes) * block;

    // Stage 1: every restart explores with the coarse tier.
    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(opt.restarts));
    run_chunks(static_cast<std::size_t>(opt.restarts), opt.threads, [&](std::size_t r) {
        RestartOutcome& out = outcomes[r];
        RngStream init(opt.root_seed, 10000 + 17 * r);
        std::vector<double> params(nparams);
        for (auto& c : params) c = init.next_normal();
        const std::vector<double> coarse =
            uniform_cloud(opt.root_seed, 20000 + 1000 * r, ambient_dim,
                          static_cast<std::size_t>(opt.coarse_samples));
        SectionObjective obj(depth, ambient_dim, f, k, node_bases, &coarse, &out,
                             static_cast<int>(r));
        SimplexOptions nm;
        nm.max_iterations = opt.max_iterations;
        nm.target = 2.0 * opt.tolerance;
        const SimplexResult res = nelder_mead(std::cref(obj), params, 0.35, nm);
        out.params = res.x;
        out.residual = res.f;
    });

    // Stage 2: the two most promising restarts escalate to the fine tier.
    std::vector<std::size_t> rank(outcomes.size());
    for (std::size_t r = 0; r < rank.size(); ++r) rank[r] = r;
    std::sort(rank.begin(), rank.end(),
              [&](std::size_t a, std::size_t b) { return outcomes[a].residual < outcomes[b].residual; });
    const std::size_t escalate = std::min<std::size_t>(2, rank.size());
    run_chunks(escalate, opt.threads, [&](std::size_t j) {
        RestartOutcome& out = outcomes[rank[j]];
        const std::vector<double> fine =
            uniform_cloud(opt.root_seed, 20500 + 1000 * rank[j], ambient_dim,
                          static_cast<std::size_t>(opt.fine_samples));
        SectionObjective obj(depth, ambient_dim, f, k, node_bases, &fine, &out,
                             static_cast<int>(rank[j]));
        SimplexOptions nm;
        nm.max_iterations = std::min(opt.max_iterations, 250);
        nm.target = 0.2 * opt.tolerance;
        SimplexResult res = nelder_mead(std::cref(obj), out.params, 0.05, nm);
        nm.max_iterations = std::min(opt.max_iterations, 120);
        for (double step : {0.012, 0.004}) {
            if (res.f <= nm.target) break;
            res = nelder_mead(std::cref(obj), res.x, step, nm);
        }
        out.params = res.x;
        out.residual = res.f;
    });

    std::size_t best = rank[0];
    for (std::size_t j = 1; j < escalate; ++j)
        if (outcomes[rank[j]].residual < outcomes[best].residual) best = rank[j];

    // Stage 3: short high-sample polish of the winner.
    {
        RestartOutcome& out = outcomes[best];
        const std::vector<double> polish =
            uniform_cloud(opt.root_seed, 21000, ambient_dim,
                          static_cast<std::size_t>(4 * opt.fine_samples), opt.threads);
        SectionObjective obj(depth, ambient_dim, f, k, node_bases, &polish, &out,
                             static_cast<int>(best));
        SimplexOptions nm;
        nm.max_iterations = 90;
        nm.target = 0.05 * opt.tolerance;
        const SimplexResult res = nelder_mead(std::cref(obj), out.params, 0.004, nm);
        if (res.f < out.residual) {
            out.params = res.x;
            out.residual = res.f;
        }
    }

    SolveResult res;
    for (auto& o : outcomes)
        for (auto& row : o.trace) res.trace.push_back(std::move(row));
    res.residual_opt = outcomes[best].residual;
    auto p = decode_partition(outcomes[best].params, depth, ambient_dim, node_bases);
    if (!p) return res;
    res.partition = *p;

    const long vsamples = opt.verify_samples > 0 ? opt.verify_samples : 10 * opt.fine_samples;
    const std::vector<double> vcloud = uniform_cloud(opt.root_seed, 99000, ambient_dim,
                                                     static_cast<std::size_t>(vsamples),
                                                     opt.threads);
    const SectionEval ver = evaluate_section(*p, f, k, vcloud);
    res.residual_verified = residual(ver.value);
    res.volumes = ver.volumes;
    res.images.assign(ver.images.begin(), ver.images.end());
    const double target = std::pow(0.5, depth);
    res.volume_gap = 0.0;
    for (double v : ver.volumes) res.volume_gap = std::max(res.volume_gap, std::fabs(v - target));
    res.image_diameter = 0.0;
    for (std::size_t a = 0; a < ver.images.size(); ++a)
        for (std::size_t b = a + 1; b < ver.images.size(); ++b) {
            if (!ver.images[a] || !ver.images[b]) continue;
            double d2 = 0.0;
            for (std::size_t j = 0; j < ver.images[a]->size(); ++j) {
                const double dd = (*ver.images[a])[j] - (*ver.images[b])[j];
                d2 += dd * dd;
            }
            res.image_diameter = std::max(res.image_diameter, std::sqrt(d2));
        }
    res.converged = res.residual_opt <= opt.tolerance &&
                    res.residual_verified <= 2.0 * opt.tolerance &&
                    res.volume_gap <= 2.0 * opt.tolerance &&
                    res.image_diameter <= 2.0 * opt.tolerance;
    return res;
}

}  // namespace detail

/// Searches P_i for a zero of the section by multistart derivative-free
/// descent with common random numbers and sample escalation. A failed search
/// reports NotConverged through the flag; it never refutes existence.
inline SolveResult solve(int depth, int ambient_dim, const MapFn& f, int k,
                         const SolveOptions& opt) {
    return detail::solve_impl(depth, ambient_dim, f, k, opt, nullptr);
}

/// A linear subspace of R^(n+1) given by orthonormal basis rows.
struct Subspace {
    std::vector<std::vector<double>> basis;

    std::size_t dim() const { return basis.size(); }
    std::size_t ambient() const { return basis.empty() ? 0 : basis[0].size(); }

    /// Orthonormal basis of the orthogonal complement.
    Subspace complement() const {
        const std::size_t d = ambient();
        auto full = complete_basis(basis, d);
        Subspace out;
        out.basis.assign(full.begin() + static_cast<std::ptrdiff_t>(dim()), full.end());
        return out;
    }
};

/// Net of (n-k-1)-planes through the origin: every sampled ball
/// B(x, eps_net) of a random S^(k+1) comes within eps_net of some plane.
/// Verified probabilistically on fresh test balls; planes are added through
/// uncovered centers until one full batch passes.
inline std::vector<Subspace> grassmann_net(int n, int k, double eps_net, RngStream& rng,
                                           int test_balls = 10000, long max_planes = 1000000) {
    if (n - k - 1 < 1) throw OutOfDomain{};
    const std::size_t d = static_cast<std::size_t>(n) + 1;
    const std::size_t plane_dim = static_cast<std::size_t>(n - k - 1);
    std::vector<Subspace> planes;

    auto covered = [&](std::span<const double> x) {
        for (const auto& L : planes)
            if (angle_to_subspace(L.basis, x) <= eps_net) return true;
        return false;
    };

    for (int round = 0; round < 4096; ++round) {
        std::vector<std::vector<double>> uncovered;
        for (int b = 0; b < test_balls; ++b) {
            const auto W = random_orthonormal(rng, d, static_cast<std::size_t>(k) + 2);
            std::vector<double> x(d, 0.0);
            for (const auto& w : W) axpy(rng.next_normal(), w, x);
            const double nn = norm(x);
            if (nn < 1e-9) continue;
            scale_inplace(x, 1.0 / nn);
            if (!covered(x) && uncovered.size() < 8) uncovered.push_back(std::move(x));
        }
        if (uncovered.empty()) return planes;
        for (auto& x : uncovered) {
            if (covered(x)) continue;  // a plane added this round may already reach it
            std::vector<std::vector<double>> gen{std::move(x)};
            while (gen.size() < plane_dim) {
                std::vector<double> g(d);
                for (auto& c : g) c = rng.next_normal();
                gen.push_back(std::move(g));
                gen = orthonormalize(std::move(gen));
            }
            planes.push_back(Subspace{std::move(gen)});
            if (static_cast<long>(planes.size()) > max_planes) throw BudgetExceeded{};
        }
    }
    throw BudgetExceeded{};
}

/// Upper bound on the pancake width of a cell: sample it, fit the dominant
/// (k+1)-dimensional subspace by the second-moment spectrum, and report the
/// farthest sample from that great k-subsphere.
inline double pancake_width(const ConvexCell& cell, int k, long samples, RngStream& rng) {
    if (cell.constraints.empty()) throw EmptyCell{};
    const int n = cell.constraints[0].first.dim();
    const std::size_t d = static_cast<std::size_t>(n) + 1;
    std::vector<double> kept;
    kept.reserve(static_cast<std::size_t>(samples) * d);
    std::vector<double> x(d);
    long found = 0;
    const long max_proposals = std::max<long>(2000000, samples * 4000);
    for (long trial = 0; trial < max_proposals && found < samples; ++trial) {
        double nn = 0.0;
        do {
            nn = 0.0;
            for (auto& c : x) {
                c = rng.next_normal();
                nn += c * c;
            }
        } while (nn < 1e-24);
        const double inv = 1.0 / std::sqrt(nn);
        for (auto& c : x) c *= inv;
        if (!cell.contains(std::span<const double>(x))) continue;
        kept.insert(kept.end(), x.begin(), x.end());
        ++found;
    }
    if (found < std::max<long>(8, samples / 64)) throw EmptyCell{};

    std::vector<double> moment(d * d, 0.0);
    for (long s = 0; s < found; ++s) {
        const double* p = kept.data() + static_cast<std::size_t>(s) * d;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) moment[i * d + j] += p[i] * p[j];
    }
    for (auto& c : moment) c /= static_cast<double>(found);
    std::vector<double> evals;
    std::vector<std::vector<double>> evecs;
    jacobi_eigen(moment, d, evals, evecs);
    std::vector<std::vector<double>> U(evecs.begin(),
                                       evecs.begin() + static_cast<std::ptrdiff_t>(k) + 1);
    double width = 0.0;
    for (long s = 0; s < found; ++s) {
        std::span<const double> p(kept.data() + static_cast<std::size_t>(s) * d, d);
        width = std::max(width, angle_to_subspace(U, p));
    }
    return width;
}

struct ConstrainedResult {
    SolveResult solve;
    std::vector<double> pancake_widths;  // per leaf, NaN for empty cells
};

/// Equalizer solve with every cut normal confined to the unit sphere of the
/// complement of one of the given planes (an S^(k+1) each); node m uses
/// plane (m-1) mod N. Reports per-cell pancake widths of the result.
inline ConstrainedResult constrained_solve(int depth, int ambient_dim, const MapFn& f, int k,
                                           const std::vector<Subspace>& planes,
                                           const SolveOptions& opt, long pancake_samples = 4000) {
    if (planes.empty()) throw OutOfDomain{};
    const int nodes = (1 << depth) - 1;
    std::vector<std::vector<std::vector<double>>> bases;
    bases.reserve(static_cast<std::size_t>(nodes));
    for (int m = 0; m < nodes; ++m)
        bases.push_back(planes[static_cast<std::size_t>(m) % planes.size()].complement().basis);
    ConstrainedResult out{detail::solve_impl(depth, ambient_dim, f, k, opt, &bases), {}};
    if (!out.solve.partition) return out;
    RngStream rng(opt.root_seed, 777);
    for (int leaf = 0; leaf < (1 << depth); ++leaf) {
        const ConvexCell cell = cell_constraints(*out.solve.partition, leaf);
        try {
            out.pancake_widths.push_back(pancake_width(cell, k, pancake_samples, rng));
        } catch (const EmptyCell&) {
            out.pancake_widths.push_back(std::nan(""));
        }
    }
    return out;
}

}  // namespace waist
