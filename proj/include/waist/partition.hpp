#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <cstring>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "waist/errors.hpp"
#include "waist/parallel.hpp"
#include "waist/rng.hpp"
#include "waist/sphere.hpp"

namespace waist {

/// Rooted binary tree of depth i with heap-order node indexing: internal
/// nodes 1 .. 2^i - 1, node m has children 2m and 2m + 1. Leaves carry
/// labels 0 .. 2^i - 1 in left-to-right order (heap index 2^i + label).
struct PartitionTree {
    int depth = 1;

    int node_count() const { return (1 << depth) - 1; }
    int leaf_count() const { return 1 << depth; }
    /// Level of node m, 1-based (root is level 1).
    static int level(int m) {
        int l = 0;
        while (m) {
            ++l;
            m >>= 1;
        }
        return l;
    }
};

/// A point of the i-step oriented partition space: one unit normal per
/// internal node. The cell under a leaf is the intersection of the signed
/// hemispheres met along the root-to-leaf path.
class OrientedPartition {
public:
    OrientedPartition(int depth, std::vector<UnitVector> normals)
        : tree_{depth}, normals_(std::move(normals)) {
        if (depth < 1) throw DepthTooLarge(depth);
        if (static_cast<int>(normals_.size()) != tree_.node_count()) throw DimMismatch{};
        for (const auto& v : normals_)
            if (v.dim() != normals_[0].dim()) throw DimMismatch{};
    }

    int depth() const { return tree_.depth; }
    int dim() const { return normals_[0].dim(); }
    const PartitionTree& tree() const { return tree_; }
    int node_count() const { return tree_.node_count(); }
    int leaf_count() const { return tree_.leaf_count(); }

    /// Normal at internal node m (1-based heap index).
    const UnitVector& normal(int m) const { return normals_.at(static_cast<std::size_t>(m) - 1); }

    /// Node-major flat copy of all normals, for hot loops.
    std::vector<double> flat() const {
        std::vector<double> out;
        out.reserve(normals_.size() * (static_cast<std::size_t>(dim()) + 1));
        for (const auto& v : normals_) out.insert(out.end(), v.coords().begin(), v.coords().end());
        return out;
    }

    bool operator==(const OrientedPartition& o) const {
        if (depth() != o.depth() || dim() != o.dim()) return false;
        for (int m = 1; m <= node_count(); ++m)
            if (!(normal(m) == o.normal(m))) return false;
        return true;
    }

private:
    PartitionTree tree_;
    std::vector<UnitVector> normals_;
};

/// Element of Aut(T_i): one subtree-swap bit per internal node. Swapping at
/// node m exchanges its two child subtrees and reverses the orientation of
/// its normal; the group has order 2^(2^i - 1).
class TreeAutomorphism {
public:
    explicit TreeAutomorphism(int depth)
        : depth_(depth), bits_(static_cast<std::size_t>((1 << depth) - 1), 0) {}

    TreeAutomorphism(int depth, std::vector<std::uint8_t> bits)
        : depth_(depth), bits_(std::move(bits)) {
        if (static_cast<int>(bits_.size()) != (1 << depth) - 1) throw DimMismatch{};
    }

    static TreeAutomorphism identity(int depth) { return TreeAutomorphism(depth); }

    /// Automorphism whose bits are the binary digits of `mask` in node order.
    static TreeAutomorphism from_mask(int depth, std::uint64_t mask) {
        TreeAutomorphism g(depth);
        for (std::size_t m = 0; m < g.bits_.size(); ++m) g.bits_[m] = (mask >> m) & 1u;
        return g;
    }

    int depth() const { return depth_; }
    bool swap_at(int m) const { return bits_.at(static_cast<std::size_t>(m) - 1) != 0; }
    void set_swap(int m, bool b) { bits_.at(static_cast<std::size_t>(m) - 1) = b ? 1 : 0; }

    bool is_identity() const {
        return std::all_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b == 0; });
    }

private:
    int depth_;
    std::vector<std::uint8_t> bits_;
};

/// Wreath-product composition: apply(compose(g, h), p) == apply(g, apply(h, p)).
inline TreeAutomorphism compose(const TreeAutomorphism& g, const TreeAutomorphism& h) {
    if (g.depth() != h.depth()) throw DimMismatch{};
    const int nodes = (1 << g.depth()) - 1;
    TreeAutomorphism out(g.depth());
    // g's swap decides which child subtree of h lands under each child of out.
    std::function<void(int, int)> rec = [&](int gm, int hm) {
        const bool sg = g.swap_at(gm);
        out.set_swap(gm, sg != h.swap_at(hm));
        if (2 * gm > nodes) return;
        rec(2 * gm, 2 * hm + (sg ? 1 : 0));
        rec(2 * gm + 1, 2 * hm + (sg ? 0 : 1));
    };
    rec(1, 1);
    return out;
}

/// The Aut(T_i) action on P_i. A set bit at node m negates the normal stored
/// there and exchanges the subtrees hanging below it; the induced unoriented
/// partition of the sphere is unchanged.
inline OrientedPartition apply_automorphism(const TreeAutomorphism& g, const OrientedPartition& p) {
    if (g.depth() != p.depth()) throw DimMismatch{};
    const int nodes = p.node_count();
    std::vector<std::optional<UnitVector>> out(static_cast<std::size_t>(nodes));
    std::function<void(int, int)> rec = [&](int om, int pm) {
        const bool s = g.swap_at(om);
        out[static_cast<std::size_t>(om) - 1] = s ? p.normal(pm).negated() : p.normal(pm);
        if (2 * om > nodes) return;
        rec(2 * om, 2 * pm + (s ? 1 : 0));
        rec(2 * om + 1, 2 * pm + (s ? 0 : 1));
    };
    rec(1, 1);
    std::vector<UnitVector> normals;
    normals.reserve(static_cast<std::size_t>(nodes));
    for (auto& v : out) normals.push_back(std::move(*v));
    return OrientedPartition(p.depth(), std::move(normals));
}

/// Open convex cell of a partition: signed half-space constraints along a
/// root-to-leaf path. Membership is strict, so cutting hyperspheres belong
/// to no cell.
struct ConvexCell {
    std::vector<std::pair<UnitVector, int>> constraints;
    int leaf_label = 0;

    bool contains(const UnitVector& x) const {
        for (const auto& [v, s] : constraints)
            if (s * dot(x, v) <= 0.0) return false;
        return true;
    }

    bool contains(std::span<const double> x) const {
        for (const auto& [v, s] : constraints)
            if (s * dot(x, v.coords()) <= 0.0) return false;
        return true;
    }
};

/// Leaf label of the cell containing x: descend from the root, taking the
/// left child when x . v_node > 0. Throws OnBoundary when x lies within
/// 1e-12 of a visited cutting hypersphere (callers discard such samples).
inline int cell_of(const UnitVector& x, const OrientedPartition& p) {
    if (x.dim() != p.dim()) throw DimMismatch{};
    int m = 1;
    for (int l = 0; l < p.depth(); ++l) {
        const double d = dot(x, p.normal(m));
        if (std::fabs(d) < 1e-12) throw OnBoundary{};
        m = 2 * m + (d > 0.0 ? 0 : 1);
    }
    return m - p.leaf_count();
}

namespace detail {

/// Non-throwing descent over a flat normal array; returns -1 on boundary.
inline int cell_of_flat(const double* x, const double* normals, int depth, int dim1) {
    int m = 1;
    for (int l = 0; l < depth; ++l) {
        const double* v = normals + static_cast<std::size_t>(m - 1) * dim1;
        double d = 0.0;
        for (int i = 0; i < dim1; ++i) d += x[i] * v[i];
        if (d < 1e-12 && d > -1e-12) return -1;
        m = 2 * m + (d > 0.0 ? 0 : 1);
    }
    return m - (1 << depth);
}

}  // namespace detail

/// The i signed constraints along the path from the root to a leaf.
inline ConvexCell cell_constraints(const OrientedPartition& p, int leaf_label) {
    if (leaf_label < 0 || leaf_label >= p.leaf_count()) throw OutOfDomain{};
    ConvexCell cell;
    cell.leaf_label = leaf_label;
    int m = p.leaf_count() + leaf_label;
    std::vector<std::pair<UnitVector, int>> rev;
    while (m > 1) {
        const int parent = m / 2;
        rev.emplace_back(p.normal(parent), (m % 2 == 0) ? +1 : -1);
        m = parent;
    }
    cell.constraints.assign(rev.rbegin(), rev.rend());
    return cell;
}

/// Monte Carlo estimate of vol(cell) / vol(S^n) with binomial standard error.
inline std::pair<double, double> cell_volume_mc(const ConvexCell& cell, long samples,
                                                RngStream& rng) {
    if (samples < 1000) throw OutOfDomain{};
    if (cell.constraints.empty()) throw OutOfDomain{};
    const int n = cell.constraints[0].first.dim();
    const std::size_t d = static_cast<std::size_t>(n) + 1;
    std::vector<double> x(d);
    long hits = 0;
    for (long s = 0; s < samples; ++s) {
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
        if (cell.contains(std::span<const double>(x))) ++hits;
    }
    const double f = static_cast<double>(hits) / static_cast<double>(samples);
    return {f, std::sqrt(f * (1.0 - f) / static_cast<double>(samples))};
}

/// All images of p under Aut(T_i); exactly 2^(2^i - 1) elements when the
/// action is free (generic p). Capped at depth 4.
inline std::vector<OrientedPartition> orbit(const OrientedPartition& p) {
    if (p.depth() > 4) throw DepthTooLarge(p.depth());
    const int nodes = p.node_count();
    std::vector<OrientedPartition> out;
    out.reserve(1u << nodes);
    for (std::uint64_t mask = 0; mask < (1ull << nodes); ++mask)
        out.push_back(apply_automorphism(TreeAutomorphism::from_mask(p.depth(), mask), p));
    return out;
}

namespace detail {

inline bool flat_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

/// Orbit representative: the lexicographically smallest image under the
/// coordinate-wise order on flattened normals. Constant on orbits, idempotent.
inline OrientedPartition canonical_form(const OrientedPartition& p) {
    if (p.depth() > 4) throw DepthTooLarge(p.depth());
    const int nodes = p.node_count();
    std::optional<OrientedPartition> best;
    std::vector<double> best_flat;
    for (std::uint64_t mask = 0; mask < (1ull << nodes); ++mask) {
        OrientedPartition q = apply_automorphism(TreeAutomorphism::from_mask(p.depth(), mask), p);
        std::vector<double> f = q.flat();
        if (!best || detail::flat_less(f, best_flat)) {
            best = std::move(q);
            best_flat = std::move(f);
        }
    }
    return *best;
}

/// Per-leaf tallies of a sample cloud: counts, coordinate sums and the
/// number of discarded on-boundary samples.
struct CellStats {
    long accepted = 0;
    long boundary = 0;
    std::vector<long> counts;
    std::vector<std::vector<double>> sums;

    double volume(int leaf) const {
        return accepted ? static_cast<double>(counts[static_cast<std::size_t>(leaf)]) /
                              static_cast<double>(accepted)
                        : 0.0;
    }

    /// Cone centroid of the samples in a leaf; empty cells have none.
    std::optional<UnitVector> center(int leaf) const {
        const auto& s = sums[static_cast<std::size_t>(leaf)];
        if (counts[static_cast<std::size_t>(leaf)] == 0 || norm(s) < 1e-12) return std::nullopt;
        return normalize(s);
    }
};

/// Classifies a flat cloud (count rows of dim+1 doubles) into the leaves of p.
inline CellStats classify_cloud(const OrientedPartition& p, std::span<const double> cloud) {
    const int dim1 = p.dim() + 1;
    const std::size_t count = cloud.size() / static_cast<std::size_t>(dim1);
    const std::vector<double> normals = p.flat();
    CellStats st;
    st.counts.assign(static_cast<std::size_t>(p.leaf_count()), 0);
    st.sums.assign(static_cast<std::size_t>(p.leaf_count()),
                   std::vector<double>(static_cast<std::size_t>(dim1), 0.0));
    for (std::size_t s = 0; s < count; ++s) {
        const double* x = cloud.data() + s * static_cast<std::size_t>(dim1);
        const int leaf = detail::cell_of_flat(x, normals.data(), p.depth(), dim1);
        if (leaf < 0) {
            ++st.boundary;
            continue;
        }
        ++st.accepted;
        ++st.counts[static_cast<std::size_t>(leaf)];
        auto& sum = st.sums[static_cast<std::size_t>(leaf)];
        for (int i = 0; i < dim1; ++i) sum[static_cast<std::size_t>(i)] += x[i];
    }
    return st;
}

/// Volume and center-image aggregates per (node, side). For a node h whose
/// normal points at its left subtree, v_pos[h] is the volume fraction routed
/// left and phi_pos[h] the volume-weighted f-images of the leaf centers
/// there; v_neg / phi_neg cover the right side, i.e. the node with flipped
/// orientation. At the root, v_pos + v_neg is the total volume.
struct NodeAggregates {
    std::vector<double> v_pos, v_neg;             // indexed by node, 1-based
    std::vector<std::vector<double>> phi_pos, phi_neg;
};

using MapFn = std::function<std::vector<double>(const UnitVector&)>;

/// Builds the aggregates from per-leaf volumes and centers. Empty cells
/// (no center) contribute zero, matching v(h) f(c) -> 0 as v(h) -> 0.
inline NodeAggregates node_aggregates(const OrientedPartition& p, const MapFn& f, int range_dim,
                                      std::span<const double> leaf_volumes,
                                      std::span<const std::optional<UnitVector>> leaf_centers) {
    const int nodes = p.node_count();
    const int leaves = p.leaf_count();
    if (static_cast<int>(leaf_volumes.size()) != leaves ||
        static_cast<int>(leaf_centers.size()) != leaves)
        throw DimMismatch{};

    const std::size_t k = static_cast<std::size_t>(range_dim);
    // Subtree totals, indexed over the extended heap (leaves included).
    std::vector<double> vol(static_cast<std::size_t>(2 * leaves), 0.0);
    std::vector<std::vector<double>> phi(static_cast<std::size_t>(2 * leaves),
                                         std::vector<double>(k, 0.0));
    for (int leaf = 0; leaf < leaves; ++leaf) {
        const std::size_t node = static_cast<std::size_t>(leaves + leaf);
        vol[node] = leaf_volumes[static_cast<std::size_t>(leaf)];
        if (leaf_centers[static_cast<std::size_t>(leaf)] && vol[node] > 0.0) {
            const std::vector<double> img = f(*leaf_centers[static_cast<std::size_t>(leaf)]);
            if (img.size() != k) throw DimMismatch{};
            for (std::size_t j = 0; j < k; ++j) phi[node][j] = vol[node] * img[j];
        }
    }
    for (int m = nodes; m >= 1; --m) {
        const std::size_t node = static_cast<std::size_t>(m);
        vol[node] = vol[2 * node] + vol[2 * node + 1];
        for (std::size_t j = 0; j < k; ++j)
            phi[node][j] = phi[2 * node][j] + phi[2 * node + 1][j];
    }

    NodeAggregates agg;
    agg.v_pos.assign(static_cast<std::size_t>(nodes) + 1, 0.0);
    agg.v_neg.assign(static_cast<std::size_t>(nodes) + 1, 0.0);
    agg.phi_pos.assign(static_cast<std::size_t>(nodes) + 1, std::vector<double>(k, 0.0));
    agg.phi_neg.assign(static_cast<std::size_t>(nodes) + 1, std::vector<double>(k, 0.0));
    for (int m = 1; m <= nodes; ++m) {
        const std::size_t node = static_cast<std::size_t>(m);
        agg.v_pos[node] = vol[2 * node];
        agg.v_neg[node] = vol[2 * node + 1];
        agg.phi_pos[node] = phi[2 * node];
        agg.phi_neg[node] = phi[2 * node + 1];
    }
    return agg;
}

/// Serializes a partition as plain text, one node per row, 17 significant
/// digits. Round-trips bit-exactly through parse_partition.
inline std::string to_text(const OrientedPartition& p) {
    std::string out = "partition v1\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "depth %d\n", p.depth());
    out += buf;
    std::snprintf(buf, sizeof buf, "dim %d\n", p.dim());
    out += buf;
    for (int m = 1; m <= p.node_count(); ++m) {
        std::snprintf(buf, sizeof buf, "node %d", m);
        out += buf;
        for (double c : p.normal(m).coords()) {
            std::snprintf(buf, sizeof buf, " %.17g", c);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

inline OrientedPartition parse_partition(const std::string& text) {
    std::istringstream in(text);
    std::string word, version;
    in >> word >> version;
    if (word != "partition" || version != "v1") throw OutOfDomain{};
    int depth = 0, dim = 0;
    in >> word >> depth;
    if (word != "depth") throw OutOfDomain{};
    in >> word >> dim;
    if (word != "dim") throw OutOfDomain{};
    const int nodes = (1 << depth) - 1;
    std::vector<UnitVector> normals;
    normals.reserve(static_cast<std::size_t>(nodes));
    for (int m = 1; m <= nodes; ++m) {
        int idx = 0;
        in >> word >> idx;
        if (word != "node" || idx != m) throw OutOfDomain{};
        std::vector<double> c(static_cast<std::size_t>(dim) + 1);
        for (auto& x : c) {
            in >> word;
            x = std::strtod(word.c_str(), nullptr);
        }
        normals.push_back(UnitVector(std::move(c)));
    }
    return OrientedPartition(depth, std::move(normals));
}

}  // namespace waist
