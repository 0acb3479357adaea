#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "waist/errors.hpp"
#include "waist/rng.hpp"

namespace waist {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline void scale_inplace(std::span<double> a, double c) {
    for (double& x : a) x *= c;
}

inline void axpy(double c, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline double clamp_unit(double x) { return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x); }

/// Modified Gram-Schmidt. Vectors with residual norm below tol are dropped.
inline std::vector<std::vector<double>> orthonormalize(std::vector<std::vector<double>> vecs,
                                                       double tol = 1e-10) {
    std::vector<std::vector<double>> basis;
    for (auto& v : vecs) {
        for (const auto& b : basis) axpy(-dot(v, b), b, v);
        const double n = norm(v);
        if (n > tol) {
            scale_inplace(v, 1.0 / n);
            basis.push_back(std::move(v));
        }
    }
    return basis;
}

/// Extends an orthonormal set to a full orthonormal basis of R^dim,
/// deterministically, by orthogonalizing canonical axes against it.
inline std::vector<std::vector<double>> complete_basis(std::vector<std::vector<double>> basis,
                                                       std::size_t dim) {
    for (std::size_t axis = 0; axis < dim && basis.size() < dim; ++axis) {
        std::vector<double> v(dim, 0.0);
        v[axis] = 1.0;
        for (const auto& b : basis) axpy(-dot(v, b), b, v);
        const double n = norm(v);
        if (n > 1e-8) {
            scale_inplace(v, 1.0 / n);
            basis.push_back(std::move(v));
        }
    }
    return basis;
}

/// m random orthonormal vectors in R^dim (Gaussian + Gram-Schmidt).
inline std::vector<std::vector<double>> random_orthonormal(RngStream& rng, std::size_t dim,
                                                           std::size_t m) {
    std::vector<std::vector<double>> vecs;
    while (vecs.size() < m) {
        std::vector<std::vector<double>> cand = vecs;
        std::vector<double> v(dim);
        for (auto& x : v) x = rng.next_normal();
        cand.push_back(std::move(v));
        cand = orthonormalize(std::move(cand));
        if (cand.size() > vecs.size()) vecs = std::move(cand);
    }
    return vecs;
}

/// Norm of the projection of x onto span(basis); basis rows orthonormal.
inline double projection_norm(const std::vector<std::vector<double>>& basis,
                              std::span<const double> x) {
    double s = 0.0;
    for (const auto& b : basis) {
        const double c = dot(b, x);
        s += c * c;
    }
    return std::sqrt(s);
}

/// Principal angle between a unit vector and a linear subspace, in [0, pi/2].
inline double angle_to_subspace(const std::vector<std::vector<double>>& basis,
                                std::span<const double> x) {
    return std::acos(clamp_unit(projection_norm(basis, x)));
}

/// Eigen-decomposition of a small symmetric matrix (row-major, d x d) by
/// cyclic Jacobi rotations. Eigenvalues returned in decreasing order,
/// eigenvectors as rows of `vectors`.
inline void jacobi_eigen(std::vector<double> a, std::size_t d, std::vector<double>& values,
                         std::vector<std::vector<double>>& vectors) {
    std::vector<double> v(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < d; ++i) {
                    const double aip = a[i * d + p], aiq = a[i * d + q];
                    a[i * d + p] = c * aip - s * aiq;
                    a[i * d + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double api = a[p * d + i], aqi = a[q * d + i];
                    a[p * d + i] = c * api - s * aqi;
                    a[q * d + i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double vip = v[p * d + i], viq = v[q * d + i];
                    v[p * d + i] = c * vip - s * viq;
                    v[q * d + i] = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(d);
    for (std::size_t i = 0; i < d; ++i) order[i] = i;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (a[order[j] * d + order[j]] > a[order[i] * d + order[i]]) std::swap(order[i], order[j]);

    values.assign(d, 0.0);
    vectors.assign(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
        values[i] = a[order[i] * d + order[i]];
        for (std::size_t jj = 0; jj < d; ++jj) vectors[i][jj] = v[order[i] * d + jj];
    }
}

}  // namespace waist
