#pragma once

#include <cmath>
#include <functional>

#include "mvh/fsolver.hpp"
#include "mvh/path_sim.hpp"

namespace mvh {

/// One (value, Brownian integrand, jump integrand) triple of a lifted
/// solution at a given (path, time). In the deterministic-coefficient
/// regime the Brownian integrand vanishes identically.
struct GTriple {
    double y = 0.0;
    double z = 0.0;
    double u = 0.0;
};

/// After-jump terminal curve of each before-default equation: 1 for the
/// weight, the after-default payoff for the target, 0 for the residual.
inline double after_jump_terminal(FComponent which, const ClaimSpec& claim, double t) {
    switch (which) {
        case FComponent::Weight: return 1.0;
        case FComponent::Target: return claim.h_a.value(t);
        case FComponent::Residual: return 0.0;
    }
    return 0.0;
}

/// Rebuild the enlarged-filtration solution from a before-default curve and
/// the after-jump terminal curve:
///   y = f(t) before tau, xi_a(tau) from tau on;
///   z = 0;  u = (xi_a(t) - f(t)) up to and including tau, 0 after.
template <typename FValue>
GTriple lift_triple(FValue&& f_value, const Curve& xi_a, double tau, double t) {
    GTriple g;
    if (t < tau) {
        g.y = f_value(t);
        g.u = xi_a.value(t) - g.y;
    } else {
        g.y = xi_a.value(tau);
        g.u = (t <= tau) ? xi_a.value(t) - f_value(t) : 0.0;
    }
    g.z = 0.0;
    return g;
}

inline GTriple lift_triple(const FSolution& sol, FComponent which, const ClaimSpec& claim,
                           double tau, double t) {
    switch (which) {
        case FComponent::Weight: {
            auto f = [&](double s) { return interpolate(sol, FComponent::Weight, s); };
            return lift_triple(f, Curve::constant(1.0), tau, t);
        }
        case FComponent::Target: {
            auto f = [&](double s) { return interpolate(sol, FComponent::Target, s); };
            return lift_triple(f, claim.h_a, tau, t);
        }
        case FComponent::Residual: {
            auto f = [&](double s) { return interpolate(sol, FComponent::Residual, s); };
            return lift_triple(f, Curve::constant(0.0), tau, t);
        }
    }
    return {};
}

namespace detail {

inline double quad_denominator(const Coefficients& c, double lam_g, double y, double u) {
    return c.sigma * c.sigma * y + lam_g * c.beta * c.beta * (u + y);
}

inline void require_positive_denominator(double den) {
    if (!(den > 0.0))
        throw SolverError("driver undefined at state: nonpositive denominator " +
                          format17(den));
}

} // namespace detail

/// Driver of the weight equation:
/// -(mu y + sigma z + lam_g beta u)^2 / (sigma^2 y + lam_g beta^2 (u + y)).
inline double g_driver_f(const Coefficients& c, double lam_g, double y, double z, double u) {
    const double den = detail::quad_denominator(c, lam_g, y, u);
    detail::require_positive_denominator(den);
    const double num = c.mu * y + c.sigma * z + lam_g * c.beta * u;
    return -num * num / den;
}

inline double g_driver_f(const MarketModel& m, double t, double lam_g, double y, double z,
                         double u) {
    return g_driver_f(eval_coeffs(m, t), lam_g, y, z, u);
}

/// Driver of the target equation; `w` is the weight-equation state entering
/// as a coefficient.
inline double g_driver_g(const Coefficients& c, double lam_g, const GTriple& w, double y,
                         double z, double u) {
    (void)y;
    const double den = detail::quad_denominator(c, lam_g, w.y, w.u);
    detail::require_positive_denominator(den);
    const double gw = c.mu * w.y + c.sigma * w.z + lam_g * c.beta * w.u;
    const double mix = c.sigma * w.y * z + lam_g * c.beta * (w.u + w.y) * u;
    return (w.z * z + lam_g * w.u * u - gw * mix / den) / w.y;
}

inline double g_driver_g(const MarketModel& m, double t, double lam_g, const GTriple& w,
                         double y, double z, double u) {
    return g_driver_g(eval_coeffs(m, t), lam_g, w, y, z, u);
}

/// Driver of the residual equation; depends only on the weight and target
/// states. Nonnegative by Cauchy-Schwarz, and equal to the residual ODE
/// driver before the default time.
inline double g_driver_h(const Coefficients& c, double lam_g, const GTriple& w,
                         const GTriple& g) {
    const double den = detail::quad_denominator(c, lam_g, w.y, w.u);
    detail::require_positive_denominator(den);
    const double mix = c.sigma * w.y * g.z + lam_g * c.beta * g.u * (w.u + w.y);
    return g.z * g.z * w.y + lam_g * (w.u + w.y) * g.u * g.u - mix * mix / den;
}

inline double g_driver_h(const MarketModel& m, double t, double lam_g, const GTriple& w,
                         const GTriple& g) {
    return g_driver_h(eval_coeffs(m, t), lam_g, w, g);
}

/// Maximum pathwise defect of the lifted equation
///   Y_{t^tau} = xi + int driver ds - int U dN
/// telescoped over the path mesh with left-endpoint quadrature (the
/// Brownian integral is zero in this regime). The time integral carries the
/// jump-compensator shift lam_g * u, and the dN integral contributes the
/// exact jump value at tau. First order in the mesh size.
inline double bsde_residual(const MarketPath& path, const FSolution& sol,
                            const MarketModel& m, const ClaimSpec& claim, FComponent which) {
    const double T = m.horizon;
    const double tau = path.tau;
    const std::size_t stop = path.stop_index;

    double xi = 0.0;
    switch (which) {
        case FComponent::Weight: xi = 1.0; break;
        case FComponent::Target: xi = claim_payoff(claim, tau, T); break;
        case FComponent::Residual: xi = 0.0; break;
    }

    auto f_at = [&](double t) { return interpolate(sol, which, t); };

    // jump integrand at tau (only when the default happens before T)
    double u_at_tau = 0.0;
    if (tau <= T)
        u_at_tau = after_jump_terminal(which, claim, tau) - f_at(tau);

    // integral of the driver from each mesh point to T ^ tau, accumulated
    // backward with left-endpoint quadrature
    std::vector<double> suffix(stop + 1, 0.0);
    for (std::size_t j = stop; j-- > 0;) {
        const double t = path.times[j];
        const double dt = path.times[j + 1] - t;
        const Coefficients c = eval_coeffs(m, t);
        const double lam_g = c.lambda; // strictly before tau here
        const double yb = interpolate(sol, FComponent::Weight, t);
        const GTriple w{yb, 0.0, 1.0 - yb};
        double drv = 0.0;
        switch (which) {
            case FComponent::Weight:
                drv = g_driver_f(c, lam_g, w.y, w.z, w.u) + lam_g * w.u;
                break;
            case FComponent::Target: {
                const double yc = interpolate(sol, FComponent::Target, t);
                const GTriple g{yc, 0.0, claim.h_a.value(t) - yc};
                drv = g_driver_g(c, lam_g, w, g.y, g.z, g.u) + lam_g * g.u;
                break;
            }
            case FComponent::Residual: {
                const double yc = interpolate(sol, FComponent::Target, t);
                const GTriple g{yc, 0.0, claim.h_a.value(t) - yc};
                const double ups = interpolate(sol, FComponent::Residual, t);
                drv = g_driver_h(c, lam_g, w, g) + lam_g * (-ups);
                break;
            }
        }
        suffix[j] = suffix[j + 1] + drv * dt;
    }

    double worst = 0.0;
    for (std::size_t i = 0; i <= stop; ++i) {
        const double t = path.times[i];
        const double y = (i == stop && tau <= T)
                             ? after_jump_terminal(which, claim, tau)
                             : f_at(t);
        const double jump = (t < tau && tau <= T) ? u_at_tau : 0.0;
        const double defect = y - xi - suffix[i] + jump;
        worst = std::max(worst, std::abs(defect));
    }
    return worst;
}

} // namespace mvh
