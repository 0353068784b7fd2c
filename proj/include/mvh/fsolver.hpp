#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mvh/market.hpp"

namespace mvh {

/// Time mesh for the backward solves: a uniform grid unioned with every
/// node of the model and claim curves, so drivers are smooth within steps.
struct SolverGrid {
    std::vector<double> times; // 0 = t_0 < ... < t_n = T

    static SolverGrid build(const MarketModel& m, const ClaimSpec& claim, int n_steps) {
        if (n_steps < 1) throw ValidationError("solver grid: n_steps must be >= 1");
        const double T = m.horizon;
        std::vector<double> pts;
        pts.reserve(static_cast<std::size_t>(n_steps) + 8);
        for (int i = 0; i <= n_steps; ++i)
            pts.push_back(T * static_cast<double>(i) / n_steps);
        m.mu.collect_breakpoints(0.0, T, pts);
        m.sigma.collect_breakpoints(0.0, T, pts);
        m.beta.collect_breakpoints(0.0, T, pts);
        m.lambda.collect_breakpoints(0.0, T, pts);
        claim.h_a.collect_breakpoints(0.0, T, pts);
        std::sort(pts.begin(), pts.end());
        SolverGrid g;
        g.times.reserve(pts.size());
        const double tol = 1e-12 * std::max(1.0, T);
        for (double t : pts)
            if (g.times.empty() || t - g.times.back() > tol) g.times.push_back(t);
        g.times.front() = 0.0;
        g.times.back() = T;
        return g;
    }

    std::size_t size() const { return times.size(); }
};

/// Which solved curve: the quadratic risk weight (column y_b), the hedging
/// target (yc_b) or the unhedgeable residual value (ups_b).
enum class FComponent { Weight, Target, Residual };

/// Before-default solution curves on the mesh, plus the mesh-point
/// derivatives used for order-consistent cubic interpolation. Derivatives
/// are stored per side because drivers may jump at curve nodes.
struct FSolution {
    SolverGrid grid;
    std::vector<double> y_b;   // weight, terminal value 1
    std::vector<double> yc_b;  // target, terminal value h_b
    std::vector<double> ups_b; // residual, terminal value 0
    double epsilon_guard = 0.0;
    bool guard_activated = false;

    std::vector<double> dy_r, dy_l;     // d y_b/dt at t_i, right/left samples
    std::vector<double> dyc_r, dyc_l;   // d yc_b/dt
    std::vector<double> dups_r, dups_l; // d ups_b/dt

    double horizon() const { return grid.times.back(); }
    double h_b() const { return yc_b.back(); }
};

/// Positivity guard from the comparison bound: the weight curve never falls
/// below exp(-int_0^T (lambda + ((mu - lambda beta)/sigma)^2)).
inline double epsilon_guard_value(const MarketModel& m) {
    return std::exp(-risk_exponent_integral(m, 0.0, m.horizon));
}

/// Pointwise comparison floor exp(-int_t^T (lambda + ((mu-lambda beta)/sigma)^2)).
inline double weight_lower_bound(const MarketModel& m, double t) {
    return std::exp(-risk_exponent_integral(m, t, m.horizon));
}

namespace detail {

// Forward-time dY/dt of the weight ODE, with the denominator floored at eps.
inline double weight_rhs(const Coefficients& c, double y, double eps, bool* guard) {
    double yy = y;
    if (yy < eps) {
        if (guard) *guard = true;
        yy = eps;
    }
    const double r = (c.mu - c.lambda * c.beta) * y + c.lambda * c.beta;
    const double den = c.sigma * c.sigma * yy + c.lambda * c.beta * c.beta;
    return r * r / den - c.lambda + c.lambda * y;
}

// Linear coefficient of the target ODE: d yc/dt = a(t) * (yc - h_a(t)).
inline double target_coef(const Coefficients& c, double y_b) {
    const double num = c.lambda * (c.sigma * c.sigma - c.beta * (c.mu - c.lambda * c.beta));
    const double den = c.sigma * c.sigma * y_b + c.lambda * c.beta * c.beta;
    return num / den;
}

// Nonnegative driver of the residual ODE: d ups/dt = lambda * ups - R(t).
inline double residual_driver(const Coefficients& c, double y_b, double yc_b, double h_a) {
    const double gap = h_a - yc_b;
    const double den = c.sigma * c.sigma * y_b + c.lambda * c.beta * c.beta;
    const double jump_term = c.lambda * c.beta * gap;
    return c.lambda * gap * gap - jump_term * jump_term / den;
}

// Cubic Hermite midpoint from endpoint values and slopes.
inline double hermite_mid(double y0, double y1, double m0, double m1, double dt) {
    return 0.5 * (y0 + y1) + 0.125 * dt * (m0 - m1);
}

inline void check_finite(double y, double t, const char* which) {
    if (!std::isfinite(y))
        throw SolverError(std::string("solver diverged: non-finite ") + which +
                          " state at t=" + format17(t));
}

} // namespace detail

/// Backward RK4 for the weight curve from Y(T) = 1. `guard_hit` records
/// whether the epsilon floor ever bound during integration.
inline std::vector<double> solve_f_guarded(const MarketModel& m, const SolverGrid& grid,
                                           double eps, bool& guard_hit) {
    const auto& t = grid.times;
    const std::size_t n = t.size() - 1;
    std::vector<double> y(n + 1);
    y[n] = 1.0;
    guard_hit = false;
    for (std::size_t i = n; i-- > 0;) {
        const double b = t[i + 1], a = t[i];
        const double h = a - b; // negative
        const double mid = b + 0.5 * h;
        const Coefficients cb = eval_coeffs_left(m, b);
        const Coefficients cm = eval_coeffs(m, mid);
        const Coefficients ca = eval_coeffs(m, a);
        const double y1 = y[i + 1];
        const double k1 = detail::weight_rhs(cb, y1, eps, &guard_hit);
        const double k2 = detail::weight_rhs(cm, y1 + 0.5 * h * k1, eps, &guard_hit);
        const double k3 = detail::weight_rhs(cm, y1 + 0.5 * h * k2, eps, &guard_hit);
        const double k4 = detail::weight_rhs(ca, y1 + h * k3, eps, &guard_hit);
        y[i] = y1 + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        detail::check_finite(y[i], a, "weight");
    }
    return y;
}

inline std::vector<double> solve_f(const MarketModel& m, const SolverGrid& grid) {
    bool guard = false;
    auto y = solve_f_guarded(m, grid, epsilon_guard_value(m), guard);
    if (guard)
        throw SolverError("positivity guard bound - refine grid");
    return y;
}

/// Backward RK4 for the target curve from yc(T) = h_b. The weight curve
/// enters the driver; its within-step values come from the Hermite cubic,
/// which keeps fourth order.
inline std::vector<double> solve_g(const MarketModel& m, const ClaimSpec& claim,
                                   const std::vector<double>& y_b, const SolverGrid& grid) {
    const auto& t = grid.times;
    const std::size_t n = t.size() - 1;
    std::vector<double> yc(n + 1);
    yc[n] = claim.h_b;
    const double eps = epsilon_guard_value(m);
    for (std::size_t i = n; i-- > 0;) {
        const double b = t[i + 1], a = t[i];
        const double h = a - b;
        const double mid = b + 0.5 * h;
        const Coefficients cb = eval_coeffs_left(m, b);
        const Coefficients cm = eval_coeffs(m, mid);
        const Coefficients ca = eval_coeffs(m, a);
        const double slope_a = detail::weight_rhs(ca, y_b[i], eps, nullptr);
        const double slope_b = detail::weight_rhs(cb, y_b[i + 1], eps, nullptr);
        const double y_mid = detail::hermite_mid(y_b[i], y_b[i + 1], slope_a, slope_b, b - a);
        const double ha_b = claim.h_a.value_left(b);
        const double ha_m = claim.h_a.value(mid);
        const double ha_a = claim.h_a.value(a);

        auto rhs = [](const Coefficients& c, double yb, double v, double ha) {
            return detail::target_coef(c, yb) * (v - ha);
        };
        const double v1 = yc[i + 1];
        const double k1 = rhs(cb, y_b[i + 1], v1, ha_b);
        const double k2 = rhs(cm, y_mid, v1 + 0.5 * h * k1, ha_m);
        const double k3 = rhs(cm, y_mid, v1 + 0.5 * h * k2, ha_m);
        const double k4 = rhs(ca, y_b[i], v1 + h * k3, ha_a);
        yc[i] = v1 + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        detail::check_finite(yc[i], a, "target");
    }
    return yc;
}

/// Backward RK4 for the residual curve from ups(T) = 0.
inline std::vector<double> solve_h(const MarketModel& m, const ClaimSpec& claim,
                                   const std::vector<double>& y_b,
                                   const std::vector<double>& yc_b, const SolverGrid& grid) {
    const auto& t = grid.times;
    const std::size_t n = t.size() - 1;
    std::vector<double> ups(n + 1);
    ups[n] = 0.0;
    const double eps = epsilon_guard_value(m);
    for (std::size_t i = n; i-- > 0;) {
        const double b = t[i + 1], a = t[i];
        const double h = a - b;
        const double mid = b + 0.5 * h;
        const Coefficients cb = eval_coeffs_left(m, b);
        const Coefficients cm = eval_coeffs(m, mid);
        const Coefficients ca = eval_coeffs(m, a);
        const double dy_a = detail::weight_rhs(ca, y_b[i], eps, nullptr);
        const double dy_b = detail::weight_rhs(cb, y_b[i + 1], eps, nullptr);
        const double y_mid = detail::hermite_mid(y_b[i], y_b[i + 1], dy_a, dy_b, b - a);
        const double ha_b = claim.h_a.value_left(b);
        const double ha_m = claim.h_a.value(mid);
        const double ha_a = claim.h_a.value(a);
        const double dyc_a = detail::target_coef(ca, y_b[i]) * (yc_b[i] - ha_a);
        const double dyc_b = detail::target_coef(cb, y_b[i + 1]) * (yc_b[i + 1] - ha_b);
        const double yc_mid = detail::hermite_mid(yc_b[i], yc_b[i + 1], dyc_a, dyc_b, b - a);

        const double r_b = detail::residual_driver(cb, y_b[i + 1], yc_b[i + 1], ha_b);
        const double r_m = detail::residual_driver(cm, y_mid, yc_mid, ha_m);
        const double r_a = detail::residual_driver(ca, y_b[i], yc_b[i], ha_a);

        const double v1 = ups[i + 1];
        const double k1 = cb.lambda * v1 - r_b;
        const double k2 = cm.lambda * (v1 + 0.5 * h * k1) - r_m;
        const double k3 = cm.lambda * (v1 + 0.5 * h * k2) - r_m;
        const double k4 = ca.lambda * (v1 + h * k3) - r_a;
        ups[i] = v1 + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        detail::check_finite(ups[i], a, "residual");
    }
    return ups;
}

/// Solve all three curves and attach interpolation derivatives.
inline FSolution solve_all(const MarketModel& m, const ClaimSpec& claim,
                           const SolverGrid& grid) {
    FSolution sol;
    sol.grid = grid;
    sol.epsilon_guard = epsilon_guard_value(m);
    sol.guard_activated = false;
    sol.y_b = solve_f_guarded(m, grid, sol.epsilon_guard, sol.guard_activated);
    if (sol.guard_activated)
        throw SolverError("positivity guard bound - refine grid");
    sol.yc_b = solve_g(m, claim, sol.y_b, grid);
    sol.ups_b = solve_h(m, claim, sol.y_b, sol.yc_b, grid);

    const std::size_t np = grid.times.size();
    sol.dy_r.resize(np);
    sol.dy_l.resize(np);
    sol.dyc_r.resize(np);
    sol.dyc_l.resize(np);
    sol.dups_r.resize(np);
    sol.dups_l.resize(np);
    for (std::size_t i = 0; i < np; ++i) {
        const double t = grid.times[i];
        const Coefficients cr = eval_coeffs(m, t);
        const Coefficients cl = eval_coeffs_left(m, t);
        const double ha_r = claim.h_a.value(t);
        const double ha_l = claim.h_a.value_left(t);
        sol.dy_r[i] = detail::weight_rhs(cr, sol.y_b[i], sol.epsilon_guard, nullptr);
        sol.dy_l[i] = detail::weight_rhs(cl, sol.y_b[i], sol.epsilon_guard, nullptr);
        sol.dyc_r[i] = detail::target_coef(cr, sol.y_b[i]) * (sol.yc_b[i] - ha_r);
        sol.dyc_l[i] = detail::target_coef(cl, sol.y_b[i]) * (sol.yc_b[i] - ha_l);
        sol.dups_r[i] = cr.lambda * sol.ups_b[i]
                      - detail::residual_driver(cr, sol.y_b[i], sol.yc_b[i], ha_r);
        sol.dups_l[i] = cl.lambda * sol.ups_b[i]
                      - detail::residual_driver(cl, sol.y_b[i], sol.yc_b[i], ha_l);
    }
    return sol;
}

inline FSolution solve_all(const MarketModel& m, const ClaimSpec& claim, int n_steps) {
    return solve_all(m, claim, SolverGrid::build(m, claim, n_steps));
}

/// Cubic Hermite interpolation between mesh points; mesh points reproduce
/// stored values exactly.
inline double interpolate(const FSolution& sol, FComponent which, double t) {
    const auto& times = sol.grid.times;
    if (t < times.front() || t > times.back())
        throw ValidationError("interpolate: t outside [0, T]");
    const std::vector<double>* vals = nullptr;
    const std::vector<double>* dl = nullptr;
    const std::vector<double>* dr = nullptr;
    switch (which) {
        case FComponent::Weight:   vals = &sol.y_b;   dr = &sol.dy_r;   dl = &sol.dy_l;   break;
        case FComponent::Target:   vals = &sol.yc_b;  dr = &sol.dyc_r;  dl = &sol.dyc_l;  break;
        case FComponent::Residual: vals = &sol.ups_b; dr = &sol.dups_r; dl = &sol.dups_l; break;
    }
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it != times.end() && *it == t)
        return (*vals)[static_cast<std::size_t>(it - times.begin())];
    const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
    const double t0 = times[i], t1 = times[i + 1];
    const double dt = t1 - t0;
    const double s = (t - t0) / dt;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * (*vals)[i] + h10 * dt * (*dr)[i]
         + h01 * (*vals)[i + 1] + h11 * dt * (*dl)[i + 1];
}

} // namespace mvh
