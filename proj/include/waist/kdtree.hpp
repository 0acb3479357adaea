#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace waist {

/// Median-split kd-tree over points in R^d (chord metric). Built once from a
/// flat coordinate array; supports "is any point within radius rho of q",
/// which is all the tube estimator needs, with early exit.
class KdTree {
public:
    KdTree() = default;

    KdTree(std::vector<double> points, int dim) : pts_(std::move(points)), dim_(dim) {
        const std::size_t count = pts_.size() / static_cast<std::size_t>(dim_);
        idx_.resize(count);
        std::iota(idx_.begin(), idx_.end(), 0u);
        nodes_.reserve(count * 2 + 1);
        root_ = build(0, count);
    }

    std::size_t size() const { return idx_.size(); }

    bool any_within(std::span<const double> q, double rho) const {
        if (root_ < 0) return false;
        return search(root_, q, rho * rho);
    }

private:
    struct Node {
        int left = -1, right = -1;
        std::uint32_t begin = 0, end = 0;  // leaf range into idx_
        int axis = -1;
        double split = 0.0;
    };

    const double* point(std::uint32_t i) const {
        return pts_.data() + static_cast<std::size_t>(i) * dim_;
    }

    int build(std::size_t begin, std::size_t end) {
        if (begin >= end) return -1;
        Node node;
        if (end - begin <= 8) {
            node.begin = static_cast<std::uint32_t>(begin);
            node.end = static_cast<std::uint32_t>(end);
            nodes_.push_back(node);
            return static_cast<int>(nodes_.size()) - 1;
        }
        // split along the axis of largest extent
        int axis = 0;
        double best_ext = -1.0;
        for (int a = 0; a < dim_; ++a) {
            double lo = 1e300, hi = -1e300;
            for (std::size_t i = begin; i < end; ++i) {
                const double v = point(idx_[i])[a];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_ext) {
                best_ext = hi - lo;
                axis = a;
            }
        }
        const std::size_t mid = (begin + end) / 2;
        std::nth_element(idx_.begin() + begin, idx_.begin() + mid, idx_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             return point(a)[axis] < point(b)[axis];
                         });
        node.axis = axis;
        node.split = point(idx_[mid])[axis];
        const int self = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        const int l = build(begin, mid);
        const int r = build(mid, end);
        nodes_[self].left = l;
        nodes_[self].right = r;
        return self;
    }

    bool search(int ni, std::span<const double> q, double rho2) const {
        const Node& node = nodes_[static_cast<std::size_t>(ni)];
        if (node.axis < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const double* p = point(idx_[i]);
                double d2 = 0.0;
                for (int a = 0; a < dim_; ++a) {
                    const double dd = p[a] - q[a];
                    d2 += dd * dd;
                }
                if (d2 <= rho2) return true;
            }
            return false;
        }
        const double delta = q[node.axis] - node.split;
        const int near = delta < 0.0 ? node.left : node.right;
        const int far = delta < 0.0 ? node.right : node.left;
        if (near >= 0 && search(near, q, rho2)) return true;
        if (far >= 0 && delta * delta <= rho2) return search(far, q, rho2);
        return false;
    }

    std::vector<double> pts_;
    int dim_ = 0;
    std::vector<std::uint32_t> idx_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace waist
