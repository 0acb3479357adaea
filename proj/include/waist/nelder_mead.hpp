#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace waist {

struct SimplexOptions {
    int max_iterations = 400;
    double f_tol = 1e-12;     // stop when the simplex f-spread falls below
    double x_tol = 1e-10;     // ... or the vertex spread does
    double target = -1e300;   // early exit once best <= target
};

struct SimplexResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    long evaluations = 0;
};

/// Standard Nelder-Mead downhill simplex (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5). `on_step(iter, best_f)` fires once per
/// iteration; pass nullptr to skip tracing.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x0, double step,
                                 const SimplexOptions& opt,
                                 const std::function<void(int, double)>& on_step = nullptr) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> xs(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += step;
    std::vector<double> fs(n + 1);
    long evals = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        fs[i] = f(xs[i]);
        ++evals;
    }

    std::vector<std::size_t> ord(n + 1);
    SimplexResult res;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        const std::size_t best = ord[0], worst = ord[n], second = ord[n - 1];
        if (on_step) on_step(iter, fs[best]);
        if (fs[best] <= opt.target) break;
        double spread = fs[worst] - fs[best];
        double xspread = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            xspread = std::max(xspread, std::fabs(xs[worst][i] - xs[best][i]));
        if (spread < opt.f_tol && xspread < opt.x_tol) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += xs[i][j];
        }
        for (std::size_t j = 0; j < n; ++j) centroid[j] /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j)
                p[j] = centroid[j] + coef * (centroid[j] - xs[worst][j]);
            return p;
        };

        std::vector<double> xr = blend(1.0);
        const double fr = f(xr);
        ++evals;
        if (fr < fs[best]) {
            std::vector<double> xe = blend(2.0);
            const double fe = f(xe);
            ++evals;
            if (fe < fr) {
                xs[worst] = std::move(xe);
                fs[worst] = fe;
            } else {
                xs[worst] = std::move(xr);
                fs[worst] = fr;
            }
        } else if (fr < fs[second]) {
            xs[worst] = std::move(xr);
            fs[worst] = fr;
        } else {
            std::vector<double> xc = blend(fr < fs[worst] ? 0.5 : -0.5);
            const double fc = f(xc);
            ++evals;
            if (fc < std::min(fr, fs[worst])) {
                xs[worst] = std::move(xc);
                fs[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        xs[i][j] = xs[best][j] + 0.5 * (xs[i][j] - xs[best][j]);
                    fs[i] = f(xs[i]);
                    ++evals;
                }
            }
        }
    }
    std::size_t b = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fs[i] < fs[b]) b = i;
    res.x = xs[b];
    res.f = fs[b];
    res.iterations = iter;
    res.evaluations = evals;
    return res;
}

}  // namespace waist
