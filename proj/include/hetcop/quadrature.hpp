#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

namespace hetcop {

struct QuadRule {
    std::vector<double> nodes;    // on (0,1)
    std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule mapped to [0,1], computed once per order and cached.
inline const QuadRule& gauss_legendre(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, QuadRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton iteration on P_n, standard recurrence
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - static_cast<double>(j) * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.nodes[i] = 0.5 * (1.0 - x);  // descending root -> ascending node
        rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    auto [pos, inserted] = cache.insert_or_assign(n, std::move(rule));
    return pos->second;
}

/// Tensor-grid integral of f over [0,1]^2.
template <typename F>
double integrate2d_gl(F&& f, std::size_t n = 200) {
    const QuadRule& r = gauss_legendre(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += r.weights[j] * f(r.nodes[i], r.nodes[j]);
        total += r.weights[i] * row;
    }
    return total;
}

/// Adaptive 1-D integral on [a,b] (Gauss-Kronrod 15).
template <typename F>
double integrate1d(F&& f, double a, double b, double rel_tol = 1e-10, unsigned max_depth = 14) {
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(std::forward<F>(f), a, b,
                                                                         max_depth, rel_tol);
}

namespace detail {
template <typename F>
double simpson2d_panel(F& f, double ax, double bx, double ay, double by, double fasw[3][3]) {
    double hx = (bx - ax) / 2.0, hy = (by - ay) / 2.0;
    double s = 0.0;
    static const double w[3] = {1.0, 4.0, 1.0};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += w[i] * w[j] * fasw[i][j];
    return s * hx * hy / 9.0;
}

template <typename F>
double simpson2d_rec(F& f, double ax, double bx, double ay, double by, double whole, double tol,
                     int depth) {
    double mx = 0.5 * (ax + bx), my = 0.5 * (ay + by);
    auto panel = [&](double a, double b, double c, double d) {
        double g[3][3];
        double xs[3] = {a, 0.5 * (a + b), b};
        double ys[3] = {c, 0.5 * (c + d), d};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) g[i][j] = f(xs[i], ys[j]);
        return simpson2d_panel(f, a, b, c, d, g);
    };
    double q11 = panel(ax, mx, ay, my);
    double q12 = panel(ax, mx, my, by);
    double q21 = panel(mx, bx, ay, my);
    double q22 = panel(mx, bx, my, by);
    double sum = q11 + q12 + q21 + q22;
    if (depth <= 0 || std::abs(sum - whole) < 15.0 * tol) return sum + (sum - whole) / 15.0;
    double t = tol / 4.0;
    return simpson2d_rec(f, ax, mx, ay, my, q11, t, depth - 1) +
           simpson2d_rec(f, ax, mx, my, by, q12, t, depth - 1) +
           simpson2d_rec(f, mx, bx, ay, my, q21, t, depth - 1) +
           simpson2d_rec(f, mx, bx, my, by, q22, t, depth - 1);
}
}  // namespace detail

/// Adaptive 2-D Simpson on the rectangle [ax,bx] x [ay,by].
template <typename F>
double integrate2d_adaptive(F&& f, double ax, double bx, double ay, double by, double tol = 1e-7,
                            int max_depth = 12) {
    auto& fr = f;
    double g[3][3];
    double xs[3] = {ax, 0.5 * (ax + bx), bx};
    double ys[3] = {ay, 0.5 * (ay + by), by};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g[i][j] = fr(xs[i], ys[j]);
    double whole = detail::simpson2d_panel(fr, ax, bx, ay, by, g);
    return detail::simpson2d_rec(fr, ax, bx, ay, by, whole, tol, max_depth);
}

}  // namespace hetcop
