#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mvh/lift.hpp"
#include "mvh/path_sim.hpp"

namespace mvh {

enum class Side { Right, Left };

/// Investment policy evaluated along a path. Perturbed wraps a base policy
/// plus magnitude * direction(t), the family used for optimality tests.
struct StrategyKind {
    enum class Type { Optimal, Constant, Proportional, Perturbed };

    Type type = Type::Optimal;
    double amount = 0.0; // constant position, or proportionality factor
    Type base_type = Type::Optimal;
    double base_amount = 0.0;
    double magnitude = 0.0;
    Curve direction = Curve::constant(1.0);

    static StrategyKind optimal() { return {}; }
    static StrategyKind constant(double c) {
        StrategyKind k;
        k.type = Type::Constant;
        k.amount = c;
        return k;
    }
    static StrategyKind proportional(double f) {
        StrategyKind k;
        k.type = Type::Proportional;
        k.amount = f;
        return k;
    }
    static StrategyKind perturbed(double eps, Curve dir = Curve::constant(1.0)) {
        StrategyKind k;
        k.type = Type::Perturbed;
        k.base_type = Type::Optimal;
        k.magnitude = eps;
        k.direction = std::move(dir);
        return k;
    }

    std::string label() const {
        switch (type) {
            case Type::Optimal: return "optimal";
            case Type::Constant: return "constant(" + format17(amount) + ")";
            case Type::Proportional: return "proportional(" + format17(amount) + ")";
            case Type::Perturbed: return "perturbed(" + format17(magnitude) + ")";
        }
        return "?";
    }
};

/// Wealth along one scenario, stopped at T ^ tau. `pi` holds the applied
/// position per mesh point; the entry at the stopping index is the position
/// held into the jump (zero when the horizon ends without a default).
struct WealthPath {
    std::vector<double> times;
    std::vector<double> v;
    std::vector<double> pi;
};

/// Candidate optimal allocation, the drift-quadratic minimizer with the
/// lifted states substituted (Brownian integrands vanish, U + Y = 1).
/// After the horizon T ^ tau the strategy is 0 by convention.
inline double pi_star(double t, double v_minus, const FSolution& sol, const MarketModel& m,
                      const ClaimSpec& claim, bool pre_default, Side side = Side::Right) {
    if (!pre_default) return 0.0;
    const Coefficients c = (side == Side::Right) ? eval_coeffs(m, t) : eval_coeffs_left(m, t);
    const double ha = (side == Side::Right) ? claim.h_a.value(t) : claim.h_a.value_left(t);
    const double yb = interpolate(sol, FComponent::Weight, t);
    const double yc = interpolate(sol, FComponent::Target, t);
    const double den = c.sigma * c.sigma * yb + c.lambda * c.beta * c.beta;
    const double p = (c.mu * yb + c.lambda * c.beta * (1.0 - yb)) / den;
    const double q = c.lambda * c.beta * (ha - yc) / den;
    return (yc - v_minus) * p + q;
}

/// Optimal mean-square hedging error for initial wealth x:
/// weight(0) * (x - target(0))^2 + residual(0).
inline double optimal_value(double x, const FSolution& sol) {
    const double gap = x - sol.yc_b.front();
    return sol.y_b.front() * gap * gap + sol.ups_b.front();
}

/// Per-mesh-point samples shared by every path of a run: Euler drift and
/// volatility at interval left endpoints, and the optimal-position
/// decomposition pi* = (yc - v) * p + q.
struct HedgeTables {
    std::vector<double> drift; // mu - lambda*beta
    std::vector<double> sig;
    std::vector<double> p, q;
    std::vector<double> yb, yc, ups, ha, lam;

    static HedgeTables build(const std::vector<double>& times, const FSolution& sol,
                             const MarketModel& m, const ClaimSpec& claim) {
        HedgeTables tb;
        const std::size_t n = times.size();
        tb.drift.resize(n);
        tb.sig.resize(n);
        tb.p.resize(n);
        tb.q.resize(n);
        tb.yb.resize(n);
        tb.yc.resize(n);
        tb.ups.resize(n);
        tb.ha.resize(n);
        tb.lam.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = times[i];
            const Coefficients c = eval_coeffs(m, t);
            const double yb = interpolate(sol, FComponent::Weight, t);
            const double yc = interpolate(sol, FComponent::Target, t);
            const double ups = interpolate(sol, FComponent::Residual, t);
            const double ha = claim.h_a.value(t);
            const double den = c.sigma * c.sigma * yb + c.lambda * c.beta * c.beta;
            tb.drift[i] = c.mu - c.lambda * c.beta;
            tb.sig[i] = c.sigma;
            tb.p[i] = (c.mu * yb + c.lambda * c.beta * (1.0 - yb)) / den;
            tb.q[i] = c.lambda * c.beta * (ha - yc) / den;
            tb.yb[i] = yb;
            tb.yc[i] = yc;
            tb.ups[i] = ups;
            tb.ha[i] = ha;
            tb.lam[i] = c.lambda;
        }
        return tb;
    }
};

namespace detail {

inline double position_at(const StrategyKind& k, StrategyKind::Type type, double amount,
                          const HedgeTables& tb, std::size_t i, double v) {
    switch (type) {
        case StrategyKind::Type::Optimal: return (tb.yc[i] - v) * tb.p[i] + tb.q[i];
        case StrategyKind::Type::Constant: return amount;
        case StrategyKind::Type::Proportional: return amount * v;
        case StrategyKind::Type::Perturbed: break;
    }
    (void)k;
    return 0.0;
}

inline double position(const StrategyKind& k, const HedgeTables& tb, std::size_t i, double t,
                       double v) {
    if (k.type == StrategyKind::Type::Perturbed)
        return position_at(k, k.base_type, k.base_amount, tb, i, v) +
               k.magnitude * k.direction.value(t);
    return position_at(k, k.type, k.amount, tb, i, v);
}

// Position held into the jump, from the pre-jump state and predictable
// (left-limit) coefficient values.
inline double jump_position(const StrategyKind& k, double tau, double v_minus,
                            const FSolution& sol, const MarketModel& m,
                            const ClaimSpec& claim) {
    switch (k.type) {
        case StrategyKind::Type::Optimal:
            return pi_star(tau, v_minus, sol, m, claim, true, Side::Left);
        case StrategyKind::Type::Constant: return k.amount;
        case StrategyKind::Type::Proportional: return k.amount * v_minus;
        case StrategyKind::Type::Perturbed: {
            double base = 0.0;
            switch (k.base_type) {
                case StrategyKind::Type::Optimal:
                    base = pi_star(tau, v_minus, sol, m, claim, true, Side::Left);
                    break;
                case StrategyKind::Type::Constant: base = k.base_amount; break;
                case StrategyKind::Type::Proportional: base = k.base_amount * v_minus; break;
                case StrategyKind::Type::Perturbed: break;
            }
            return base + k.magnitude * k.direction.value_left(tau);
        }
    }
    return 0.0;
}

/// Euler wealth over a simulated path. Table row i must sample the left
/// endpoint of path interval i, which holds both for tables built on the
/// path's own mesh and for base-mesh tables with tau inserted at the stop.
/// Returns V_{T^tau}; optionally records wealth and applied positions.
inline double evolve_wealth(const MarketPath& path, const StrategyKind& kind, double x,
                            const HedgeTables& tb, const FSolution& sol, const MarketModel& m,
                            const ClaimSpec& claim, std::vector<double>* v_out = nullptr,
                            std::vector<double>* pi_out = nullptr) {
    const std::size_t stop = path.stop_index;
    double v = x;
    if (v_out) v_out->assign(path.times.size(), x);
    if (pi_out) pi_out->assign(path.times.size(), 0.0);
    for (std::size_t i = 0; i < stop; ++i) {
        const double dt = path.times[i + 1] - path.times[i];
        const double pi = position(kind, tb, i, path.times[i], v);
        v += pi * (tb.drift[i] * dt + tb.sig[i] * path.dw[i]);
        if (pi_out) (*pi_out)[i] = pi;
        if (v_out) (*v_out)[i + 1] = v;
    }
    if (path.tau <= m.horizon) {
        const double pi_j = jump_position(kind, path.tau, v, sol, m, claim);
        v += pi_j * m.beta.value_left(path.tau);
        if (pi_out) (*pi_out)[stop] = pi_j;
        if (v_out) (*v_out)[stop] = v;
    }
    if (v_out)
        for (std::size_t i = stop + 1; i < v_out->size(); ++i) (*v_out)[i] = v;
    return v;
}

} // namespace detail

inline WealthPath wealth_euler(const MarketPath& path, const StrategyKind& kind, double x,
                               const FSolution& sol, const MarketModel& m,
                               const ClaimSpec& claim) {
    const HedgeTables tb = HedgeTables::build(path.times, sol, m, claim);
    std::vector<double> v, pi;
    detail::evolve_wealth(path, kind, x, tb, sol, m, claim, &v, &pi);
    WealthPath wp;
    const std::size_t count = path.stop_index + 1;
    wp.times.assign(path.times.begin(), path.times.begin() + count);
    wp.v.assign(v.begin(), v.begin() + count);
    wp.pi.assign(pi.begin(), pi.begin() + count);
    return wp;
}

/// Optimal wealth through the explicit exponential representation
/// V* = Phi * (x + Psi) before the default, with the exact jump value
/// (1 + E beta) V_{tau-} - F beta at tau. Time integrals use per-step
/// trapezoids, stochastic integrals left-endpoint Ito sums.
inline WealthPath wealth_closed_form(const MarketPath& path, double x, const FSolution& sol,
                                     const MarketModel& m, const ClaimSpec& claim) {
    const std::size_t stop = path.stop_index;
    WealthPath wp;
    wp.times.assign(path.times.begin(), path.times.begin() + stop + 1);
    wp.v.assign(stop + 1, x);
    wp.pi.assign(stop + 1, 0.0);

    auto ef_at = [&](double t, Side side, double& e, double& f, double& dv, double& sg) {
        const Coefficients c = (side == Side::Right) ? eval_coeffs(m, t) : eval_coeffs_left(m, t);
        const double ha = (side == Side::Right) ? claim.h_a.value(t) : claim.h_a.value_left(t);
        const double yb = interpolate(sol, FComponent::Weight, t);
        const double yc = interpolate(sol, FComponent::Target, t);
        const double den = c.sigma * c.sigma * yb + c.lambda * c.beta * c.beta;
        const double gw = c.mu * yb + c.lambda * c.beta * (1.0 - yb);
        e = -gw / den;
        f = -(c.lambda * c.beta * (ha - yc) + yc * gw) / den;
        dv = c.mu - c.lambda * c.beta;
        sg = c.sigma;
    };

    double log_phi = 0.0;
    double psi = 0.0;
    double phi = 1.0;
    for (std::size_t i = 0; i < stop; ++i) {
        const double t0 = path.times[i], t1 = path.times[i + 1];
        const double dt = t1 - t0;
        double e0, f0, dv0, sg0, e1, f1, dv1, sg1;
        ef_at(t0, Side::Right, e0, f0, dv0, sg0);
        ef_at(t1, Side::Left, e1, f1, dv1, sg1);
        wp.pi[i] = e0 * wp.v[i] - f0;
        const double a0 = e0 * dv0 - 0.5 * sg0 * sg0 * e0 * e0;
        const double a1 = e1 * dv1 - 0.5 * sg1 * sg1 * e1 * e1;
        log_phi += 0.5 * (a0 + a1) * dt + sg0 * e0 * path.dw[i];
        psi -= (f0 / phi) * ((dv0 - e0 * sg0 * sg0) * dt + sg0 * path.dw[i]);
        phi = std::exp(log_phi);
        wp.v[i + 1] = phi * (x + psi);
    }
    if (path.tau <= m.horizon) {
        double e, f, dv, sg;
        ef_at(path.tau, Side::Left, e, f, dv, sg);
        const double beta_j = m.beta.value_left(path.tau);
        const double v_minus = wp.v[stop];
        wp.pi[stop] = e * v_minus - f;
        wp.v[stop] = (1.0 + e * beta_j) * v_minus - f * beta_j;
    }
    return wp;
}

} // namespace mvh
