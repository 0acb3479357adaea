#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "waist/errors.hpp"
#include "waist/quadrature.hpp"
#include "waist/rng.hpp"

namespace waist {

/// A sin^k-concave density on a geodesic arc, built generatively:
///
///   f(t) = (max(0, min_j (a_j cos t + b_j sin t)))^k
///
/// Each a cos t + b sin t is a linear functional of the plane restricted to
/// the unit circle, so min_j is the restriction of a concave 1-homogeneous
/// function of the cone and the k-th root of f is sin-concave by
/// construction. Membership in the class never has to be recognized, only
/// validated on grids.
class Density1D {
public:
    Density1D(double k, double t0, double t1, std::vector<std::pair<double, double>> lines)
        : k_(k), t0_(t0), t1_(t1), lines_(std::move(lines)) {
        if (!(k > 0.0) || lines_.empty()) throw OutOfDomain{};
        if (!(t1_ > t0_) || t1_ - t0_ > 3.14159265358979323846 + 1e-12) throw OutOfDomain{};
    }

    double power() const { return k_; }
    double t0() const { return t0_; }
    double t1() const { return t1_; }
    const std::vector<std::pair<double, double>>& lines() const { return lines_; }

    /// The sin-concave root min_j (a_j cos t + b_j sin t), clamped at 0.
    double root_eval(double t) const {
        check_domain(t);
        return root_unchecked(t);
    }

    double eval(double t) const {
        check_domain(t);
        return std::pow(root_unchecked(t), k_);
    }

    /// Evaluation without the domain guard, for quadrature endpoints that
    /// bisection may place a few ulps outside [t0, t1].
    double eval_unchecked(double t) const { return std::pow(root_unchecked(t), k_); }

private:
    void check_domain(double t) const {
        if (t < t0_ - 1e-12 || t > t1_ + 1e-12) throw OutOfDomain{};
    }

    double root_unchecked(double t) const {
        const double ct = std::cos(t), st = std::sin(t);
        double m = lines_[0].first * ct + lines_[0].second * st;
        for (std::size_t j = 1; j < lines_.size(); ++j)
            m = std::min(m, lines_[j].first * ct + lines_[j].second * st);
        return m > 0.0 ? m : 0.0;
    }

    double k_;
    double t0_, t1_;
    std::vector<std::pair<double, double>> lines_;
};

/// A function sampled on a uniform grid t0 + i*step.
struct GridFunction {
    double t0 = 0.0;
    double step = 0.0;
    std::vector<double> values;

    double t(std::size_t i) const { return t0 + static_cast<double>(i) * step; }
    double t_end() const { return t(values.size() - 1); }
};

inline GridFunction sample_grid(const Density1D& d, std::size_t points) {
    GridFunction g;
    g.t0 = d.t0();
    g.step = (d.t1() - d.t0()) / static_cast<double>(points - 1);
    g.values.resize(points);
    for (std::size_t i = 0; i < points; ++i)
        g.values[i] = d.eval(std::min(d.t1(), g.t(i)));
    return g;
}

inline GridFunction sample_root_grid(const Density1D& d, std::size_t points) {
    GridFunction g;
    g.t0 = d.t0();
    g.step = (d.t1() - d.t0()) / static_cast<double>(points - 1);
    g.values.resize(points);
    for (std::size_t i = 0; i < points; ++i)
        g.values[i] = d.root_eval(std::min(d.t1(), g.t(i)));
    return g;
}

/// Discrete sin-concavity test: the chord-midpoint form of concavity of the
/// 1-homogeneous extension is f(t-h) + f(t+h) <= 2 cos(h) f(t) at every
/// interior grid point, with 1e-9 slack for floating error.
inline bool is_sin_concave(const GridFunction& f) {
    if (f.values.size() < 3) return true;
    const double c2 = 2.0 * std::cos(f.step);
    for (std::size_t i = 1; i + 1 < f.values.size(); ++i)
        if (f.values[i - 1] + f.values[i + 1] > c2 * f.values[i] + 1e-9) return false;
    return true;
}

/// Checks that a sampled function has a single maximum: the discrete argmax
/// set is one plateau at most two steps wide and there is no interior strict
/// local minimum.
inline bool unique_max_check(const GridFunction& g) {
    const double vmax = *std::max_element(g.values.begin(), g.values.end());
    const double tie = vmax - 1e-12 * (1.0 + std::fabs(vmax));
    std::size_t first = g.values.size(), last = 0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        if (g.values[i] >= tie) {
            first = std::min(first, i);
            last = i;
        }
    }
    for (std::size_t i = first; i <= last; ++i)
        if (g.values[i] < tie) return false;  // argmax set not contiguous
    if (last - first > 2) return false;
    const double dip = 1e-12 * (1.0 + std::fabs(vmax));
    for (std::size_t i = 1; i + 1 < g.values.size(); ++i)
        if (g.values[i] < g.values[i - 1] - dip && g.values[i] < g.values[i + 1] - dip)
            return false;
    return true;
}

inline bool unique_max_check(const Density1D& d, double grid_step = 1e-3) {
    const std::size_t points =
        std::max<std::size_t>(8, static_cast<std::size_t>((d.t1() - d.t0()) / grid_step) + 2);
    return unique_max_check(sample_grid(d, points));
}

/// Even reflection g(t) = f(|t|) of a density on [0, tau] whose maximum sits
/// at 0. The reflection of a sin-concave function with max at 0 stays
/// sin-concave.
inline GridFunction symmetrize(const Density1D& d, std::size_t half_points = 512) {
    if (std::fabs(d.t0()) > 1e-12) throw MaxNotAtZero{};
    const GridFunction probe = sample_grid(d, std::max<std::size_t>(half_points, 64));
    const double vmax = *std::max_element(probe.values.begin(), probe.values.end());
    if (probe.values.front() < vmax - 1e-12 * (1.0 + vmax)) throw MaxNotAtZero{};

    GridFunction g;
    g.step = d.t1() / static_cast<double>(half_points);
    g.t0 = -d.t1();
    g.values.resize(2 * half_points + 1);
    for (std::size_t i = 0; i < g.values.size(); ++i)
        g.values[i] = d.eval(std::min(d.t1(), std::fabs(g.t(i))));
    return g;
}

/// Even reflection of the sin-concave root; the k-robust form of the same
/// statement.
inline GridFunction symmetrize_root(const Density1D& d, std::size_t half_points = 512) {
    GridFunction g = symmetrize(d, half_points);
    const double inv_k = 1.0 / d.power();
    for (double& v : g.values) v = std::pow(v, inv_k);
    return g;
}

struct CosComparison {
    double c = 0.0;
    bool crossing_verified = false;
};

/// Pins h(t) = c cos^k(t) to f at eps and verifies the one-crossing picture:
/// f >= h before eps, f <= h after, pointwise on a 1e-3 grid.
inline CosComparison cos_comparison(const Density1D& d, double eps, double tau) {
    if (!(eps > 0.0) || !(eps < tau) || tau > 1.5707963267948966 + 1e-12) throw OutOfDomain{};
    if (std::fabs(d.t0()) > 1e-12 || d.t1() < tau - 1e-12) throw OutOfDomain{};
    const double fe = d.eval(eps);
    if (!(fe > 0.0)) throw ZeroMass{};
    CosComparison out;
    out.c = fe / std::pow(std::cos(eps), d.power());
    out.crossing_verified = true;
    const double step = 1e-3;
    for (double t = 0.0; t <= tau + 1e-15; t += step) {
        const double tt = std::min(t, tau);
        const double h = out.c * std::pow(std::cos(tt), d.power());
        const double f = d.eval(std::min(tt, d.t1()));
        if (tt <= eps && f < h - 1e-9) out.crossing_verified = false;
        if (tt >= eps && f > h + 1e-9) out.crossing_verified = false;
    }
    return out;
}

struct RatioBound {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// The mass-ratio inequality for sin^k-concave f with max at 0 on [0, tau]:
///
///   int_0^min(eps,tau) f sin^a / int_0^tau f sin^a
///     >= int_0^eps cos^k sin^a / int_0^(pi/2) cos^k sin^a.
///
/// Returns both sides; the contract is lhs >= rhs - 1e-8, with equality for
/// f = cos^k and tau = pi/2.
inline RatioBound ratio_bound(const Density1D& d, double alpha, double eps,
                              double quad_tol = 1e-12) {
    const double half_pi = 1.5707963267948966;
    if (alpha < 0.0 || eps <= 0.0 || eps > half_pi + 1e-12) throw OutOfDomain{};
    if (std::fabs(d.t0()) > 1e-12 || d.t1() > half_pi + 1e-9) throw OutOfDomain{};
    const double tau = d.t1();
    auto f_int = [&](double t) { return d.eval_unchecked(t) * std::pow(std::sin(t), alpha); };
    const double den = integrate(f_int, 0.0, tau, quad_tol);
    if (den < 1e-300) throw ZeroMass{};
    RatioBound out;
    out.lhs = integrate(f_int, 0.0, std::min(eps, tau), quad_tol) / den;
    const double k = d.power();
    auto g_int = [&](double t) {
        return std::pow(std::cos(t), k) * std::pow(std::sin(t), alpha);
    };
    out.rhs = integrate(g_int, 0.0, eps, quad_tol) / integrate(g_int, 0.0, half_pi, quad_tol);
    return out;
}

/// Random sin^k-concave instance. With max_at_zero the domain is [0, tau]
/// and every support line decreases there, so the maximum sits at 0 and the
/// density stays strictly positive.
inline Density1D make_random_density(RngStream& rng, double k, bool max_at_zero) {
    const int nlines = 1 + static_cast<int>(rng.next_double() * 3.0);
    std::vector<std::pair<double, double>> lines;
    double min_phase = 10.0;
    for (int j = 0; j < nlines; ++j) {
        const double phase = max_at_zero ? -0.05 - 0.55 * rng.next_double()
                                         : -0.5 + 1.0 * rng.next_double();
        const double radius = 0.5 + 1.5 * rng.next_double();
        lines.emplace_back(radius * std::cos(phase), radius * std::sin(phase));
        min_phase = std::min(min_phase, phase);
    }
    if (max_at_zero) {
        // positive up to min_phase + pi/2; keep a margin
        const double tmax = min_phase + 1.5707963267948966 - 0.05;
        const double tau = 0.2 + (tmax - 0.2) * rng.next_double();
        return Density1D(k, 0.0, tau, std::move(lines));
    }
    const double lo = min_phase + 1.5707963267948966;
    const double t0 = -0.45 + 0.1 * rng.next_double();
    const double t1 = std::min(lo - 0.05, 0.35 + 0.5 * rng.next_double());
    return Density1D(k, t0, std::max(t1, t0 + 0.2), std::move(lines));
}

/// Text form: power, domain, one support line per row; round-trips exactly.
inline std::string to_text(const Density1D& d) {
    char buf[128];
    std::string out = "density1d v1\n";
    std::snprintf(buf, sizeof buf, "k %.17g\ndomain %.17g %.17g\n", d.power(), d.t0(), d.t1());
    out += buf;
    for (const auto& [a, b] : d.lines()) {
        std::snprintf(buf, sizeof buf, "line %.17g %.17g\n", a, b);
        out += buf;
    }
    return out;
}

inline Density1D parse_density(const std::string& text) {
    std::istringstream in(text);
    std::string word, version;
    in >> word >> version;
    if (word != "density1d" || version != "v1") throw OutOfDomain{};
    double k = 0, t0 = 0, t1 = 0;
    in >> word >> k;
    if (word != "k") throw OutOfDomain{};
    in >> word >> t0 >> t1;
    if (word != "domain") throw OutOfDomain{};
    std::vector<std::pair<double, double>> lines;
    double a, b;
    while (in >> word >> a >> b) {
        if (word != "line") throw OutOfDomain{};
        lines.emplace_back(a, b);
    }
    return Density1D(k, t0, t1, std::move(lines));
}

}  // namespace waist
