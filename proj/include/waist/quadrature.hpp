#pragma once

#include <cmath>
#include <cstddef>

namespace waist {

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (QUADPACK constants).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double kGK15WeightsK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double kGK15WeightsG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
inline void gk15(const F& f, double a, double b, double& value, double& error) {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    double resk = 0.0, resg = 0.0;
    for (int j = 0; j < 8; ++j) {
        const double x = h * kGK15Nodes[j];
        const double f1 = f(c - x);
        const double f2 = (j == 7) ? 0.0 : f(c + x);
        const double fs = (j == 7) ? f1 : f1 + f2;
        resk += kGK15WeightsK[j] * fs;
        if (j % 2 == 1) resg += kGK15WeightsG[j / 2] * fs;
    }
    value = resk * h;
    error = std::fabs((resk - resg) * h);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b] to the given absolute
/// tolerance. Bisects the worst interval until the local estimate is within
/// its tolerance share or the interval is at floating-point resolution.
template <typename F>
inline double integrate(const F& f, double a, double b, double abs_tol = 1e-10) {
    if (a == b) return 0.0;
    struct Item {
        double a, b, tol;
    };
    Item stack[128];
    int top = 0;
    stack[top++] = {a, b, abs_tol};
    double total = 0.0;
    while (top > 0) {
        const Item it = stack[--top];
        double v, e;
        detail::gk15(f, it.a, it.b, v, e);
        if (e <= it.tol || (it.b - it.a) < 1e-13 * (std::fabs(it.a) + std::fabs(it.b) + 1.0) ||
            top > 120) {
            total += v;
        } else {
            const double m = 0.5 * (it.a + it.b);
            stack[top++] = {it.a, m, 0.5 * it.tol};
            stack[top++] = {m, it.b, 0.5 * it.tol};
        }
    }
    return total;
}

}  // namespace waist
