#pragma once

#include <cmath>
#include <functional>

#include "hetcop/common.hpp"

namespace hetcop {

/// Invert a nondecreasing function on (lo, hi): find x with |f(x) - q| < f_tol.
/// Newton steps (when a derivative is supplied) safeguarded by a shrinking
/// bisection bracket. Throws numerical_error with the residual attached if
/// the iteration budget is exhausted.
template <typename F, typename DF>
double invert_monotone(F&& f, DF&& df, double q, double lo, double hi, double f_tol = 1e-10,
                       int max_iter = 200) {
    double flo = f(lo) - q;
    double fhi = f(hi) - q;
    if (flo >= 0.0) return lo;
    if (fhi <= 0.0) return hi;
    double x = 0.5 * (lo + hi);
    double fx = 0.0;
    double step_old = hi - lo;
    for (int it = 0; it < max_iter; ++it) {
        fx = f(x) - q;
        if (std::abs(fx) < f_tol) return x;
        if (fx > 0.0)
            hi = x;
        else
            lo = x;
        if (hi - lo < 1e-16 * (1.0 + std::abs(x))) return x;
        double d = df(x);
        double step = (d > 0.0 && std::isfinite(d)) ? fx / d : 2.0 * (hi - lo);
        double step_x = x - step;
        // bisect whenever Newton leaves the bracket or stalls; the stall
        // criterion forces the bracket to at least halve every two steps
        if (!(step_x > lo && step_x < hi) || std::abs(2.0 * step) > step_old) {
            step_x = 0.5 * (lo + hi);
            step = x - step_x;
        }
        step_old = std::abs(step) > 0.0 ? std::abs(step) : step_old;
        x = step_x;
    }
    throw numerical_error("invert_monotone: no convergence, residual " + std::to_string(fx));
}

template <typename F>
double invert_monotone(F&& f, double q, double lo, double hi, double f_tol = 1e-10,
                       int max_iter = 200) {
    return invert_monotone(std::forward<F>(f), [](double) { return 0.0; }, q, lo, hi, f_tol,
                           max_iter);
}

}  // namespace hetcop
