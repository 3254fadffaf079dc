#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace hetcop {

struct NmOptions {
    int max_evals = 4000;
    double f_tol = 1e-9;     // simplex function spread
    double x_tol = 1e-8;     // simplex diameter
    double init_step = 0.3;  // initial simplex edge
};

struct NmResult {
    std::vector<double> x;
    double f = -std::numeric_limits<double>::infinity();
    int evals = 0;
    bool converged = false;
};

/// Nelder-Mead maximization, standard reflection/expansion/contraction
/// coefficients. The objective may return -inf for infeasible points.
inline NmResult nelder_mead_max(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<double>& x0, const NmOptions& opt = {}) {
    const std::size_t d = x0.size();
    NmResult res;
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        double v = f(x);
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(d + 1, x0);
    std::vector<double> fv(d + 1);
    for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += opt.init_step;
    for (std::size_t i = 0; i <= d; ++i) fv[i] = eval(simplex[i]);

    std::vector<std::size_t> order(d + 1);
    while (evals < opt.max_evals) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] > fv[b]; });
        std::size_t best = order[0], worst = order[d], second_worst = order[d - 1];

        double spread = fv[best] - fv[worst];
        double diam = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            diam = std::max(diam, std::abs(simplex[best][i] - simplex[worst][i]));
        if ((std::isfinite(spread) && spread < opt.f_tol * (1.0 + std::abs(fv[best]))) ||
            diam < opt.x_tol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(d);

        auto blend = [&](double t) {
            std::vector<double> x(d);
            for (std::size_t j = 0; j < d; ++j)
                x[j] = centroid[j] + t * (centroid[j] - simplex[worst][j]);
            return x;
        };

        std::vector<double> xr = blend(1.0);
        double fr = eval(xr);
        if (fr > fv[best]) {
            std::vector<double> xe = blend(2.0);
            double fe = eval(xe);
            if (fe > fr) {
                simplex[worst] = std::move(xe);
                fv[worst] = fe;
            } else {
                simplex[worst] = std::move(xr);
                fv[worst] = fr;
            }
        } else if (fr > fv[second_worst]) {
            simplex[worst] = std::move(xr);
            fv[worst] = fr;
        } else {
            std::vector<double> xc = blend(fr > fv[worst] ? 0.5 : -0.5);
            double fc = eval(xc);
            if (fc > std::max(fr, fv[worst])) {
                simplex[worst] = std::move(xc);
                fv[worst] = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < d; ++j)
                        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
                    fv[i] = eval(simplex[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= d; ++i)
        if (fv[i] > fv[best]) best = i;
    res.x = simplex[best];
    res.f = fv[best];
    res.evals = evals;
    return res;
}

}  // namespace hetcop
