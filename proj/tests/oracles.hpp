// Test-only reference computations, independent of the library's solver
// path: an implicit Gauss-Legendre integrator, quadrature helpers, and
// closed-form representations used as oracles.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "mvh/market.hpp"

namespace oracle {

/// Two-stage Gauss-Legendre implicit Runge-Kutta (order 4, A-stable),
/// fixed step, integrating dy/dt = f(t, y) backward from y(T) = y_T on a
/// uniform mesh of n steps. Returns values ascending in time, y[0] = y(0).
/// Stage equations are solved by fixed-point iteration (the steps used here
/// are far below the contraction limit).
inline std::vector<double> gauss2_backward(const std::function<double(double, double)>& f,
                                           double T, double y_T, int n) {
    static const double root3 = std::sqrt(3.0);
    const double c1 = 0.5 - root3 / 6.0, c2 = 0.5 + root3 / 6.0;
    const double a11 = 0.25, a12 = 0.25 - root3 / 6.0;
    const double a21 = 0.25 + root3 / 6.0, a22 = 0.25;

    std::vector<double> y(static_cast<std::size_t>(n) + 1);
    y[static_cast<std::size_t>(n)] = y_T;
    const double h = -T / n; // backward
    for (int i = n; i-- > 0;) {
        const double t0 = T * (i + 1) / n;
        const double y0 = y[static_cast<std::size_t>(i) + 1];
        double k1 = f(t0, y0), k2 = k1;
        for (int it = 0; it < 12; ++it) {
            const double k1n = f(t0 + c1 * h, y0 + h * (a11 * k1 + a12 * k2));
            const double k2n = f(t0 + c2 * h, y0 + h * (a21 * k1 + a22 * k2));
            if (std::abs(k1n - k1) + std::abs(k2n - k2) < 1e-15 * (1.0 + std::abs(k1))) {
                k1 = k1n;
                k2 = k2n;
                break;
            }
            k1 = k1n;
            k2 = k2n;
        }
        y[static_cast<std::size_t>(i)] = y0 + 0.5 * h * (k1 + k2);
    }
    return y;
}

/// Composite Simpson quadrature with n subintervals (n rounded up to even).
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Before-default weight ODE right-hand side, transcribed directly from the
/// decomposed equation (kept separate from the library implementation).
inline double weight_ode_rhs(const mvh::MarketModel& m, double t, double y) {
    const auto c = mvh::eval_coeffs(m, t);
    const double r = (c.mu - c.lambda * c.beta) * y + c.lambda * c.beta;
    return r * r / (c.sigma * c.sigma * y + c.lambda * c.beta * c.beta) - c.lambda +
           c.lambda * y;
}

inline double target_linear_coef(const mvh::MarketModel& m, double t, double y_b) {
    const auto c = mvh::eval_coeffs(m, t);
    return c.lambda * (c.sigma * c.sigma - c.beta * (c.mu - c.lambda * c.beta)) /
           (c.sigma * c.sigma * y_b + c.lambda * c.beta * c.beta);
}

/// Integrating-factor representation of the target curve at t = 0:
///   yc(0) = Gamma(T) h_b + int_0^T Gamma(s) a(s) h_a(s) ds,
/// with Gamma(t) = exp(-int_0^t a) and the weight curve supplied by the
/// independent implicit integrator on a mesh of n_fine steps.
inline double target_representation(const mvh::MarketModel& m, const mvh::ClaimSpec& claim,
                                    int n_fine) {
    auto f = [&](double t, double y) { return weight_ode_rhs(m, t, y); };
    const std::vector<double> yb = gauss2_backward(f, m.horizon, 1.0, n_fine);
    const double h = m.horizon / n_fine;
    std::vector<double> a(yb.size());
    for (std::size_t i = 0; i < yb.size(); ++i)
        a[i] = target_linear_coef(m, i * h, yb[i]);
    // cumulative trapezoid of a
    std::vector<double> acc(yb.size(), 0.0);
    for (std::size_t i = 1; i < yb.size(); ++i)
        acc[i] = acc[i - 1] + 0.5 * (a[i - 1] + a[i]) * h;
    double integral = 0.0;
    auto g = [&](std::size_t i) {
        return std::exp(-acc[i]) * a[i] * claim.h_a.value(i * h);
    };
    for (std::size_t i = 1; i < yb.size(); ++i) integral += 0.5 * (g(i - 1) + g(i)) * h;
    return std::exp(-acc.back()) * claim.h_b + integral;
}

/// Discounted-driver representation of the residual curve at t = 0:
///   ups(0) = int_0^T R(s) exp(-Lambda(s)) ds,
/// the integrating-factor solution of d ups/dt = lambda ups - R with
/// ups(T) = 0. Weight and target curves come from the independent implicit
/// integrator.
inline double residual_representation(const mvh::MarketModel& m, const mvh::ClaimSpec& claim,
                                      int n_fine) {
    auto fw = [&](double t, double y) { return weight_ode_rhs(m, t, y); };
    const std::vector<double> yb = gauss2_backward(fw, m.horizon, 1.0, n_fine);
    const double h = m.horizon / n_fine;
    auto yb_at = [&](double t) {
        const double pos = t / h;
        const std::size_t i = std::min(static_cast<std::size_t>(pos), yb.size() - 2);
        const double w = pos - static_cast<double>(i);
        return (1.0 - w) * yb[i] + w * yb[i + 1];
    };
    auto fg = [&](double t, double y) {
        return target_linear_coef(m, t, yb_at(t)) * (y - claim.h_a.value(t));
    };
    const std::vector<double> yc = gauss2_backward(fg, m.horizon, claim.h_b, n_fine);

    std::vector<double> integrand(yb.size());
    for (std::size_t i = 0; i < yb.size(); ++i) {
        const double t = i * h;
        const auto c = mvh::eval_coeffs(m, t);
        const double gap = claim.h_a.value(t) - yc[i];
        const double jump_term = c.lambda * c.beta * gap;
        const double r = c.lambda * gap * gap -
                         jump_term * jump_term /
                             (c.sigma * c.sigma * yb[i] + c.lambda * c.beta * c.beta);
        integrand[i] = r * std::exp(-mvh::cumulative_intensity(m, t));
    }
    double total = 0.0;
    for (std::size_t i = 1; i < integrand.size(); ++i)
        total += 0.5 * (integrand[i - 1] + integrand[i]) * h;
    return total;
}

/// Law-of-tau quadrature for the unhedged (pi = 0) mean-square error:
///   E|x - H|^2 = (x - h_b)^2 e^{-Lambda(T)}
///              + int_0^T (x - h_a(t))^2 lambda(t) e^{-Lambda(t)} dt.
inline double unhedged_mse(const mvh::MarketModel& m, const mvh::ClaimSpec& claim, double x) {
    const double T = m.horizon;
    auto density_term = [&](double t) {
        const double gap = x - claim.h_a.value(t);
        return gap * gap * m.lambda.value(t) * std::exp(-mvh::cumulative_intensity(m, t));
    };
    std::vector<double> cuts{0.0, T};
    m.lambda.collect_breakpoints(0.0, T, cuts);
    claim.h_a.collect_breakpoints(0.0, T, cuts);
    std::sort(cuts.begin(), cuts.end());
    double integral = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        if (!(cuts[i] > cuts[i - 1])) continue;
        // stay inside the segment so cadlag discontinuities are sampled once
        const double a = cuts[i - 1], b = cuts[i];
        const double shrink = 1e-12 * (b - a);
        integral += simpson(density_term, a + shrink, b - shrink, 4000);
    }
    const double gap_b = x - claim.h_b;
    return gap_b * gap_b * std::exp(-mvh::cumulative_intensity(m, T)) + integral;
}

} // namespace oracle
