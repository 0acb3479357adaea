#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "waist/concavity.hpp"
#include "waist/errors.hpp"
#include "waist/linalg.hpp"
#include "waist/partition.hpp"
#include "waist/quadrature.hpp"
#include "waist/rng.hpp"
#include "waist/sphere.hpp"

namespace waist {

struct TubeSpec {
    int n = 2;
    int k = 1;
    double eps = 0.5;
};

/// Volume fraction of the eps-tube around an equatorial S^(n-k) inside S^n:
///
///   int_0^eps cos^(n-k) t sin^(k-1) t dt / int_0^(pi/2) same.
///
/// The distance from the equatorial subsphere pushes the volume forward to
/// this 1-d profile; no dimensional constant survives the ratio.
inline double tube_fraction(int n, int k, double eps) {
    if (k < 1 || k > n) throw OutOfDomain{};
    if (eps <= 0.0) return 0.0;
    if (eps >= kHalfPi) return 1.0;
    auto w = [&](double t) {
        return std::pow(std::cos(t), n - k) * std::pow(std::sin(t), k - 1);
    };
    return integrate(w, 0.0, eps, 1e-13) / integrate(w, 0.0, kHalfPi, 1e-13);
}

inline double tube_fraction(const TubeSpec& s) { return tube_fraction(s.n, s.k, s.eps); }

/// Monte Carlo estimate of the same fraction: distance from x to the
/// equatorial S^(n-k) spanned by the first n-k+1 axes is asin |x_tail|.
inline std::pair<double, double> mc_equatorial_tube_fraction(int n, int k, double eps,
                                                             std::size_t samples,
                                                             std::uint64_t seed, int width = 1) {
    const std::size_t d = static_cast<std::size_t>(n) + 1;
    const std::vector<double> cloud = uniform_cloud(seed, 900, n, samples, width);
    const double sin_eps = std::sin(eps);
    long hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double* x = cloud.data() + s * d;
        double tail = 0.0;
        for (std::size_t i = d - static_cast<std::size_t>(k); i < d; ++i) tail += x[i] * x[i];
        if (tail <= sin_eps * sin_eps) ++hits;
    }
    const double f = static_cast<double>(hits) / static_cast<double>(samples);
    return {f, std::sqrt(f * (1.0 - f) / static_cast<double>(samples))};
}

/// A convexly-derived probability measure on a k-dimensional convex support
/// inside S^n, for k in {1, 2}. The support lives in the unit sphere of a
/// (k+1)-dimensional subspace (orthonormal `basis` rows); the density is the
/// restriction of an (n-k)-homogeneous concave-root function of the cone:
///
///   rho(w) = (max(0, min_j w . l_j))^(n-k),   w in S^k (local coords),
///
/// so rho^(1/(n-k)) is sin-concave along every geodesic arc. k = n is the
/// degenerate power 0 (uniform density on a full-dimensional support).
class KDimMeasure {
public:
    /// Arc support (k = 1): t in [t0, t1] on the great circle of the basis.
    static KDimMeasure arc(int n, std::vector<std::vector<double>> basis, double t0, double t1,
                           std::vector<std::array<double, 3>> functionals) {
        KDimMeasure m;
        m.n_ = n;
        m.k_ = 1;
        m.basis_ = std::move(basis);
        m.t0_ = t0;
        m.t1_ = t1;
        m.functionals_ = std::move(functionals);
        m.validate();
        m.mass_ = m.raw_mass();
        if (m.mass_ < 1e-300) throw ZeroMass{};
        return m;
    }

    /// Spherical polygon support (k = 2): { w : w . e_s > 0 for all edges },
    /// a convex subset of the local S^2 around the local north pole.
    static KDimMeasure polygon(int n, std::vector<std::vector<double>> basis,
                               std::vector<std::array<double, 3>> edges,
                               std::vector<std::array<double, 3>> functionals,
                               int angular_nodes = 2048) {
        KDimMeasure m;
        m.n_ = n;
        m.k_ = 2;
        m.basis_ = std::move(basis);
        m.edges_ = std::move(edges);
        m.functionals_ = std::move(functionals);
        m.angular_nodes_ = angular_nodes;
        m.validate();
        m.mass_ = m.raw_mass();
        if (m.mass_ < 1e-300) throw ZeroMass{};
        return m;
    }

    int ambient_dim() const { return n_; }
    int support_dim() const { return k_; }
    double power() const { return static_cast<double>(n_ - k_); }
    double arc_t0() const { return t0_; }
    double arc_t1() const { return t1_; }
    const std::vector<std::vector<double>>& basis() const { return basis_; }
    const std::vector<std::array<double, 3>>& functionals() const { return functionals_; }
    const std::vector<std::array<double, 3>>& edges() const { return edges_; }

    /// Raw (unnormalized) density at a local point.
    double raw_density(std::span<const double> w) const {
        double r = mindot(w);
        if (r <= 0.0) return 0.0;
        return n_ == k_ ? 1.0 : std::pow(r, static_cast<double>(n_ - k_));
    }

    /// Normalized density with respect to vol_k on the support.
    double density(std::span<const double> w) const { return raw_density(w) / mass_; }

    UnitVector embed(std::span<const double> w) const {
        std::vector<double> x(static_cast<std::size_t>(n_) + 1, 0.0);
        for (std::size_t i = 0; i < basis_.size(); ++i) axpy(w[i], basis_[i], x);
        return normalize(std::move(x));
    }

    /// Local coordinates of an ambient point that lies on the support sphere.
    std::vector<double> local(const UnitVector& x) const {
        std::vector<double> w(basis_.size());
        for (std::size_t i = 0; i < basis_.size(); ++i) w[i] = dot(basis_[i], x.coords());
        const double nn = norm(w);
        if (nn < 1.0 - 1e-6) throw OutOfDomain{};
        scale_inplace(w, 1.0 / nn);
        return w;
    }

    bool in_support(std::span<const double> w) const {
        if (k_ == 1) {
            const double t = std::atan2(w[1], w[0]);
            return t >= t0_ - 1e-12 && t <= t1_ + 1e-12;
        }
        for (const auto& e : edges_)
            if (w[0] * e[0] + w[1] * e[1] + w[2] * e[2] <= 0.0) return false;
        return true;
    }

    /// mu(B(x, r)) for a support point x (local coordinates), by quadrature
    /// in polar coordinates about x.
    double ball_mass(std::span<const double> x, double r) const {
        if (r <= 0.0) return 0.0;
        if (k_ == 1) {
            const double t = std::atan2(x[1], x[0]);
            return arc_integral(std::max(t0_, t - r), std::min(t1_, t + r)) / mass_;
        }
        return polygon_integral(x, r) / mass_;
    }

    /// k-dimensional volume of the support.
    double support_volume() const {
        if (k_ == 1) return t1_ - t0_;
        std::array<double, 3> pole = interior_point();
        double area = 0.0;
        const int M = angular_nodes_;
        std::array<double, 3> u, v;
        frame_at(pole, u, v);
        for (int a = 0; a < M; ++a) {
            const double th = 2.0 * kPi * (a + 0.5) / M;
            const double tau = exit_time(pole, dir_at(u, v, th));
            area += 1.0 - std::cos(tau);
        }
        return area * 2.0 * kPi / M;
    }

    /// Diameter of the support (k=1: arc length; k=2: max vertex distance).
    double diameter() const {
        if (k_ == 1) return t1_ - t0_;
        const auto verts = polygon_vertices();
        double best = 0.0;
        for (std::size_t i = 0; i < verts.size(); ++i)
            for (std::size_t j = i + 1; j < verts.size(); ++j) {
                const double d = std::acos(clamp_unit(verts[i][0] * verts[j][0] +
                                                      verts[i][1] * verts[j][1] +
                                                      verts[i][2] * verts[j][2]));
                best = std::max(best, d);
            }
        return best;
    }

    /// Local argmax of the density, refined to about 1e-6 arc. Throws
    /// PlateauDetected when the argmax is not an isolated point.
    std::vector<double> argmax_local() const {
        if (k_ == 1) return argmax_arc();
        return argmax_polygon();
    }

    double mass() const { return mass_; }

    /// Total mass recomputed at a different resolution; used to validate the
    /// probability normalization.
    double mass_recomputed(int angular_nodes) const {
        if (k_ == 1) return arc_integral(t0_, t1_);
        KDimMeasure tmp = *this;
        tmp.angular_nodes_ = angular_nodes;
        return tmp.raw_mass();
    }

    std::vector<std::array<double, 3>> polygon_vertices() const {
        std::vector<std::array<double, 3>> verts;
        const std::size_t m = edges_.size();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                std::array<double, 3> c = cross(edges_[i], edges_[j]);
                const double nn = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
                if (nn < 1e-12) continue;
                for (int s = 0; s < 2; ++s) {
                    std::array<double, 3> v = {c[0] / nn, c[1] / nn, c[2] / nn};
                    if (s) {
                        v[0] = -v[0];
                        v[1] = -v[1];
                        v[2] = -v[2];
                    }
                    bool ok = true;
                    for (const auto& e : edges_)
                        if (v[0] * e[0] + v[1] * e[1] + v[2] * e[2] < -1e-9) ok = false;
                    if (ok) verts.push_back(v);
                }
            }
        return verts;
    }

private:
    KDimMeasure() = default;

    void validate() const {
        if (k_ != 1 && k_ != 2) throw OutOfDomain{};
        if (n_ < k_) throw OutOfDomain{};
        if (static_cast<int>(basis_.size()) != k_ + 1) throw DimMismatch{};
        for (const auto& b : basis_)
            if (static_cast<int>(b.size()) != n_ + 1) throw DimMismatch{};
        if (functionals_.empty()) throw OutOfDomain{};
        if (k_ == 1 && (!(t1_ > t0_) || t1_ - t0_ > kPi + 1e-9)) throw OutOfDomain{};
        if (k_ == 2 && edges_.size() < 3) throw OutOfDomain{};
    }

    static std::array<double, 3> cross(const std::array<double, 3>& a,
                                       const std::array<double, 3>& b) {
        return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    }

    double mindot(std::span<const double> w) const {
        double m = 0.0;
        bool first = true;
        for (const auto& l : functionals_) {
            double s = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * l[i];
            m = first ? s : std::min(m, s);
            first = false;
        }
        return m;
    }

    double raw_arc_density(double t) const {
        const double w[2] = {std::cos(t), std::sin(t)};
        return raw_density(std::span<const double>(w, 2));
    }

    double arc_integral(double a, double b) const {
        if (b <= a) return 0.0;
        return integrate([&](double t) { return raw_arc_density(t); }, a, b, 1e-12);
    }

    // --- k = 2 machinery (local S^2) ---

    std::array<double, 3> interior_point() const {
        auto strictly_inside = [&](const std::array<double, 3>& w) {
            for (const auto& e : edges_)
                if (w[0] * e[0] + w[1] * e[1] + w[2] * e[2] <= 1e-9) return false;
            return true;
        };
        std::vector<std::array<double, 3>> candidates;
        candidates.push_back({0.0, 0.0, 1.0});
        std::array<double, 3> sum = {0, 0, 0};
        for (const auto& e : edges_) {
            sum[0] += e[0];
            sum[1] += e[1];
            sum[2] += e[2];
        }
        candidates.push_back(sum);
        std::array<double, 3> vmean = {0, 0, 0};
        for (const auto& v : polygon_vertices()) {
            vmean[0] += v[0];
            vmean[1] += v[1];
            vmean[2] += v[2];
        }
        candidates.push_back(vmean);  // cone-convex mean of the vertices
        for (auto& c : candidates) {
            const double nn = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
            if (nn < 1e-12) continue;
            c = {c[0] / nn, c[1] / nn, c[2] / nn};
            if (strictly_inside(c)) return c;
        }
        throw OutOfDomain{};
    }

    static void frame_at(const std::array<double, 3>& c, std::array<double, 3>& u,
                         std::array<double, 3>& v) {
        std::array<double, 3> probe = std::fabs(c[0]) < 0.9 ? std::array<double, 3>{1, 0, 0}
                                                            : std::array<double, 3>{0, 1, 0};
        const double pc = probe[0] * c[0] + probe[1] * c[1] + probe[2] * c[2];
        u = {probe[0] - pc * c[0], probe[1] - pc * c[1], probe[2] - pc * c[2]};
        const double nu = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        u = {u[0] / nu, u[1] / nu, u[2] / nu};
        v = cross(c, u);
    }

    static std::array<double, 3> dir_at(const std::array<double, 3>& u,
                                        const std::array<double, 3>& v, double theta) {
        const double ct = std::cos(theta), st = std::sin(theta);
        return {ct * u[0] + st * v[0], ct * u[1] + st * v[1], ct * u[2] + st * v[2]};
    }

    /// First t > 0 at which cos(t) c + sin(t) dir leaves the polygon.
    double exit_time(const std::array<double, 3>& c, const std::array<double, 3>& dir) const {
        double tau = kPi;
        for (const auto& e : edges_) {
            const double A = c[0] * e[0] + c[1] * e[1] + c[2] * e[2];
            const double B = dir[0] * e[0] + dir[1] * e[1] + dir[2] * e[2];
            if (A <= 1e-15 && B <= 0.0) return 0.0;
            const double phi = std::atan2(B, A);
            double z = std::fmod(phi + kHalfPi, kPi);
            if (z <= 1e-15) z += kPi;
            tau = std::min(tau, z);
        }
        return tau;
    }

    double polygon_integral(std::span<const double> x, double rcap) const {
        const std::array<double, 3> c = {x[0], x[1], x[2]};
        std::array<double, 3> u, v;
        frame_at(c, u, v);
        const int M = angular_nodes_;
        double total = 0.0;
        for (int a = 0; a < M; ++a) {
            const double th = 2.0 * kPi * (a + 0.5) / M;
            const std::array<double, 3> dir = dir_at(u, v, th);
            const double tau = std::min(exit_time(c, dir), rcap);
            if (tau <= 0.0) continue;
            auto f = [&](double t) {
                const double ct = std::cos(t), st = std::sin(t);
                const double w[3] = {ct * c[0] + st * dir[0], ct * c[1] + st * dir[1],
                                     ct * c[2] + st * dir[2]};
                return raw_density(std::span<const double>(w, 3)) * st;
            };
            total += integrate(f, 0.0, tau, 1e-12);
        }
        return total * 2.0 * kPi / M;
    }

    double raw_mass() const {
        if (k_ == 1) return arc_integral(t0_, t1_);
        return polygon_integral(std::span<const double>(interior_point().data(), 3), kPi);
    }

    std::vector<double> argmax_arc() const {
        const int N = 4096;
        double best_t = t0_, best_v = -1.0;
        for (int i = 0; i <= N; ++i) {
            const double t = t0_ + (t1_ - t0_) * i / N;
            const double v = raw_arc_density(t);
            if (v > best_v) {
                best_v = v;
                best_t = t;
            }
        }
        // golden-section refinement around the best grid point
        double lo = std::max(t0_, best_t - (t1_ - t0_) / N);
        double hi = std::min(t1_, best_t + (t1_ - t0_) / N);
        const double gr = 0.6180339887498949;
        for (int it = 0; it < 80 && hi - lo > 1e-9; ++it) {
            const double m1 = hi - gr * (hi - lo);
            const double m2 = lo + gr * (hi - lo);
            if (raw_arc_density(m1) < raw_arc_density(m2))
                lo = m1;
            else
                hi = m2;
        }
        const double t_star = 0.5 * (lo + hi);
        const double v_star = raw_arc_density(t_star);
        // plateau probe at 1e-3 arc
        for (double s : {-1.0, 1.0}) {
            const double tp = t_star + s * 1e-3;
            if (tp >= t0_ && tp <= t1_ &&
                raw_arc_density(tp) >= v_star - 1e-12 * (1.0 + v_star))
                throw PlateauDetected{};
        }
        return {std::cos(t_star), std::sin(t_star)};
    }

    std::vector<double> argmax_polygon() const {
        const std::array<double, 3> c0 = interior_point();
        std::array<double, 3> u, v;
        frame_at(c0, u, v);
        auto value = [&](const std::array<double, 3>& w) {
            return in_support(std::span<const double>(w.data(), 3))
                       ? mindot(std::span<const double>(w.data(), 3))
                       : -1.0;
        };
        // Coarse polar sweep, then compass refinement in the tangent plane.
        std::array<double, 3> best = c0;
        double best_v = value(c0);
        for (int a = 0; a < 48; ++a) {
            const double th = 2.0 * kPi * (a + 0.5) / 48;
            const std::array<double, 3> dir = dir_at(u, v, th);
            const double tau = exit_time(c0, dir);
            for (int j = 1; j <= 16; ++j) {
                const double t = tau * j / 16.5;
                const double ct = std::cos(t), st = std::sin(t);
                const std::array<double, 3> w = {ct * c0[0] + st * dir[0], ct * c0[1] + st * dir[1],
                                                 ct * c0[2] + st * dir[2]};
                const double val = value(w);
                if (val > best_v) {
                    best_v = val;
                    best = w;
                }
            }
        }
        double step = 0.1;
        while (step > 1e-8) {
            bool improved = false;
            std::array<double, 3> bu, bv;
            frame_at(best, bu, bv);
            for (int a = 0; a < 8; ++a) {
                const double th = 2.0 * kPi * a / 8;
                const std::array<double, 3> dir = dir_at(bu, bv, th);
                const double ct = std::cos(step), st = std::sin(step);
                const std::array<double, 3> w = {
                    ct * best[0] + st * dir[0], ct * best[1] + st * dir[1],
                    ct * best[2] + st * dir[2]};
                const double val = value(w);
                if (val > best_v) {
                    best_v = val;
                    best = w;
                    improved = true;
                    break;
                }
            }
            if (!improved) step *= 0.5;
        }
        if (n_ == k_) throw PlateauDetected{};  // power 0: density is flat
        std::array<double, 3> bu, bv;
        frame_at(best, bu, bv);
        for (int a = 0; a < 8; ++a) {
            const std::array<double, 3> dir = dir_at(bu, bv, 2.0 * kPi * a / 8);
            const double ct = std::cos(1e-3), st = std::sin(1e-3);
            const std::array<double, 3> w = {ct * best[0] + st * dir[0], ct * best[1] + st * dir[1],
                                             ct * best[2] + st * dir[2]};
            if (value(w) >= best_v - 1e-12 * (1.0 + best_v)) throw PlateauDetected{};
        }
        return {best[0], best[1], best[2]};
    }

    int n_ = 2;
    int k_ = 1;
    std::vector<std::vector<double>> basis_;
    double t0_ = 0.0, t1_ = 1.0;
    std::vector<std::array<double, 3>> edges_;
    std::vector<std::array<double, 3>> functionals_;
    double mass_ = 1.0;
    int angular_nodes_ = 2048;
};

/// M_0: the point of the support where the density is maximal.
inline UnitVector argmax_density(const KDimMeasure& mu) {
    if (mu.support_dim() >= mu.ambient_dim()) throw PlateauDetected{};
    return mu.embed(mu.argmax_local());
}

struct BallBoundResult {
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
};

/// Lemma-style lower bound: the measure of an eps-ball around the density
/// maximum dominates the equatorial tube fraction.
inline BallBoundResult ball_lower_bound_check(const KDimMeasure& mu, double eps) {
    BallBoundResult r;
    r.measured = mu.ball_mass(mu.argmax_local(), eps);
    r.bound = tube_fraction(mu.ambient_dim(), mu.support_dim(), eps);
    r.pass = r.measured >= r.bound - 1e-6;
    return r;
}

/// Density maximum bound: max phi <= 2^(n+1) / vol_k(support).
inline BallBoundResult density_max_bound_check(const KDimMeasure& mu) {
    BallBoundResult r;
    const double volk = mu.support_volume();
    if (volk < 1e-12) throw OutOfDomain{};
    std::vector<double> m0;
    try {
        m0 = mu.argmax_local();
    } catch (const PlateauDetected&) {
        m0.assign(mu.basis().size(), 0.0);  // flat density: any support point
        m0.back() = 1.0;
    }
    r.measured = mu.density(m0);
    r.bound = std::pow(2.0, mu.ambient_dim() + 1) / volk;
    r.pass = r.measured <= r.bound + 1e-9;
    return r;
}

/// Ball-mass upper bound mu(B(x, r)) <= 2^n / floor(rho / 4r) for supports of
/// diameter rho and r <= rho / 8.
inline BallBoundResult ball_mass_upper_check(const KDimMeasure& mu, const UnitVector& x,
                                             double r) {
    const double rho = mu.diameter();
    if (!(r > 0.0) || r > rho / 8.0 + 1e-15) throw OutOfDomain{};
    const double N = std::floor(rho / (4.0 * r));
    BallBoundResult out;
    out.measured = mu.ball_mass(mu.local(x), r);
    out.bound = std::pow(2.0, mu.ambient_dim()) / N + 1e-9;
    out.pass = out.measured <= out.bound;
    return out;
}

namespace detail {

inline void measure_frame(const std::array<double, 3>& c, std::array<double, 3>& u,
                          std::array<double, 3>& v) {
    std::array<double, 3> probe = std::fabs(c[0]) < 0.9 ? std::array<double, 3>{1, 0, 0}
                                                        : std::array<double, 3>{0, 1, 0};
    const double pc = probe[0] * c[0] + probe[1] * c[1] + probe[2] * c[2];
    u = {probe[0] - pc * c[0], probe[1] - pc * c[1], probe[2] - pc * c[2]};
    const double nu = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    u = {u[0] / nu, u[1] / nu, u[2] / nu};
    v = {c[1] * u[2] - c[2] * u[1], c[2] * u[0] - c[0] * u[2], c[0] * u[1] - c[1] * u[0]};
}

/// Point at geodesic distance t from c in tangent direction theta.
inline std::array<double, 3> measure_step(const std::array<double, 3>& c, double theta, double t) {
    std::array<double, 3> u, v;
    measure_frame(c, u, v);
    const double ct = std::cos(t), st = std::sin(t);
    const double cth = std::cos(theta), sth = std::sin(theta);
    return {ct * c[0] + st * (cth * u[0] + sth * v[0]), ct * c[1] + st * (cth * u[1] + sth * v[1]),
            ct * c[2] + st * (cth * u[2] + sth * v[2])};
}

}  // namespace detail

/// Approximate argmax set of x -> mu(B(x, r)) over the support, by coarse
/// sweep plus local refinement; returns every candidate within 1e-4 of the
/// best value found.
inline std::vector<UnitVector> argmax_ball_mass(const KDimMeasure& mu, double r,
                                                int sweep = 512) {
    struct Cand {
        std::vector<double> w;
        double v;
    };
    std::vector<Cand> cands;
    if (mu.support_dim() == 1) {
        const double t0 = mu.arc_t0(), t1 = mu.arc_t1();
        auto value = [&](double t) {
            const double w[2] = {std::cos(t), std::sin(t)};
            return mu.ball_mass(std::span<const double>(w, 2), r);
        };
        double best_t = t0, best_v = -1.0;
        for (int i = 0; i <= sweep; ++i) {
            const double t = t0 + (t1 - t0) * i / sweep;
            const double v = value(t);
            if (v > best_v) {
                best_v = v;
                best_t = t;
            }
        }
        double lo = std::max(t0, best_t - (t1 - t0) / sweep);
        double hi = std::min(t1, best_t + (t1 - t0) / sweep);
        const double gr = 0.6180339887498949;
        for (int it = 0; it < 60 && hi - lo > 1e-8; ++it) {
            const double m1 = hi - gr * (hi - lo);
            const double m2 = lo + gr * (hi - lo);
            if (value(m1) < value(m2))
                lo = m1;
            else
                hi = m2;
        }
        const double ts = 0.5 * (lo + hi);
        best_v = value(ts);
        // principal maximizer first, then the 1e-4 tie band
        std::vector<UnitVector> out;
        const double w[2] = {std::cos(ts), std::sin(ts)};
        out.push_back(mu.embed(std::span<const double>(w, 2)));
        for (int i = 0; i <= sweep; ++i) {
            const double t = t0 + (t1 - t0) * i / sweep;
            if (value(t) >= best_v - 1e-4) {
                const double wt[2] = {std::cos(t), std::sin(t)};
                out.push_back(mu.embed(std::span<const double>(wt, 2)));
            }
        }
        return out;
    }

    // k = 2: coarse polar sweep about the density argmax, compass refinement.
    std::vector<double> c0l;
    try {
        c0l = mu.argmax_local();
    } catch (const PlateauDetected&) {
        c0l = {0.0, 0.0, 1.0};
    }
    auto value = [&](const std::array<double, 3>& w) {
        return mu.in_support(std::span<const double>(w.data(), 3))
                   ? mu.ball_mass(std::span<const double>(w.data(), 3), r)
                   : -1.0;
    };
    const std::array<double, 3> c0 = {c0l[0], c0l[1], c0l[2]};
    std::array<double, 3> best = c0;
    double best_v = value(best);
    const int A = 16, T = 6;
    for (int a = 0; a < A; ++a)
        for (int j = 1; j <= T; ++j) {
            const std::array<double, 3> w =
                detail::measure_step(c0, 2.0 * kPi * a / A, 0.4 * j / T);
            const double val = value(w);
            if (val > best_v) {
                best_v = val;
                best = w;
            }
        }
    double step = 0.05;
    while (step > 1e-6) {
        bool improved = false;
        for (int a = 0; a < 8; ++a) {
            const std::array<double, 3> w = detail::measure_step(best, 2.0 * kPi * a / 8, step);
            const double val = value(w);
            if (val > best_v) {
                best_v = val;
                best = w;
                improved = true;
                break;
            }
        }
        if (!improved) step *= 0.5;
    }
    return {mu.embed(std::span<const double>(best.data(), 3))};
}

}  // namespace waist
