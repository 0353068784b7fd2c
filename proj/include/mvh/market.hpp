#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mvh/curve.hpp"

namespace mvh {

/// Single-asset market on [0, T]: riskless bond at rate zero and a risky
/// asset with drift mu, volatility sigma, relative jump size beta at the
/// default time, and default intensity lambda. All coefficients are
/// deterministic curves of time. Standing assumptions:
///   - mu, sigma bounded, sigma bounded away from zero,
///   - beta in [-1, C] (beta = -1 means the asset jumps to zero),
///   - lambda nonnegative and bounded.
struct MarketModel {
    double horizon = 1.0; // T, in years
    double s0 = 1.0;      // initial price, > 0
    Curve mu;
    Curve sigma;
    Curve beta;
    Curve lambda;
};

struct Coefficients {
    double mu, sigma, beta, lambda;
};

/// Validate coefficients and assemble a market model. Each violated
/// assumption produces its own diagnostic.
inline MarketModel build_market(double horizon, double s0, Curve mu, Curve sigma,
                                Curve beta, Curve lambda) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ValidationError("market: horizon T must be positive and finite");
    if (!(s0 > 0.0) || !std::isfinite(s0))
        throw ValidationError("market: initial price s0 must be positive");
    // Node values bound the whole curve for both interpolation rules, so
    // checking nodes checks the coefficient everywhere.
    for (const auto& n : mu.nodes())
        if (!std::isfinite(n.v))
            throw ValidationError("market: HS(i) violated, mu must be bounded");
    for (const auto& n : sigma.nodes()) {
        if (!std::isfinite(n.v))
            throw ValidationError("market: HS(i) violated, sigma must be bounded");
        if (!(n.v > 0.0))
            throw ValidationError("market: HS(ii) violated, sigma must be uniformly positive");
    }
    for (const auto& n : beta.nodes())
        if (!(n.v >= -1.0) || !std::isfinite(n.v))
            throw ValidationError("market: HS(iii) violated, beta must lie in [-1, C]");
    for (const auto& n : lambda.nodes())
        if (!(n.v >= 0.0) || !std::isfinite(n.v))
            throw ValidationError("market: (Htau) violated, lambda must be nonnegative and bounded");
    return MarketModel{horizon, s0, std::move(mu), std::move(sigma),
                       std::move(beta), std::move(lambda)};
}

inline Coefficients eval_coeffs(const MarketModel& m, double t) {
    return {m.mu.value(t), m.sigma.value(t), m.beta.value(t), m.lambda.value(t)};
}

/// Left limits; the predictable version used at a jump date.
inline Coefficients eval_coeffs_left(const MarketModel& m, double t) {
    return {m.mu.value_left(t), m.sigma.value_left(t), m.beta.value_left(t),
            m.lambda.value_left(t)};
}

/// Cumulative intensity Lambda(t) = int_0^t lambda, exact per segment.
inline double cumulative_intensity(const MarketModel& m, double t) {
    return m.lambda.integral(0.0, t);
}

namespace detail {

// Exact integral over one node-free segment of
//   lambda(t) + (mu(t) - lambda(t)*beta(t))^2 / sigma(t)^2,
// with every coefficient linear on the segment. The numerator is a quartic
// polynomial; division by (g0 + g1 t)^2 integrates in closed form via the
// substitution u = g0 + g1 t (sigma > 0 keeps u away from zero).
inline double risk_exponent_segment(const MarketModel& m, double a, double b) {
    double m0, m1, l0, l1, b0, b1, g0, g1;
    m.mu.local_linear(a, b, m0, m1);
    m.lambda.local_linear(a, b, l0, l1);
    m.beta.local_linear(a, b, b0, b1);
    m.sigma.local_linear(a, b, g0, g1);

    // mu - lambda*beta = c0 + c1 t + c2 t^2
    const double c0 = m0 - l0 * b0;
    const double c1 = m1 - (l0 * b1 + l1 * b0);
    const double c2 = -l1 * b1;
    // square it
    double n[5];
    n[0] = c0 * c0;
    n[1] = 2.0 * c0 * c1;
    n[2] = c1 * c1 + 2.0 * c0 * c2;
    n[3] = 2.0 * c1 * c2;
    n[4] = c2 * c2;

    const double lam_part = l0 * (b - a) + 0.5 * l1 * (b * b - a * a);

    if (g1 == 0.0) {
        double ratio = 0.0;
        double pa = a, pb = b;
        for (int k = 0; k < 5; ++k) {
            pa *= (k == 0) ? 1.0 : a;
            pb *= (k == 0) ? 1.0 : b;
            ratio += n[k] * (pb - pa) / (k + 1);
        }
        return lam_part + ratio / (g0 * g0);
    }

    // Rewrite the quartic in powers of u = g0 + g1 t.
    double d[5] = {0, 0, 0, 0, 0};
    const double inv_g1 = 1.0 / g1;
    for (int k = 0; k < 5; ++k) {
        // t^k = (u - g0)^k / g1^k, binomial expansion
        double binom = 1.0;
        double scale = 1.0;
        for (int j = 0; j < k; ++j) scale *= inv_g1;
        for (int j = k; j >= 0; --j) {
            // coefficient of u^j in (u - g0)^k is C(k,j) (-g0)^(k-j)
            double c = binom * scale;
            for (int p = 0; p < k - j; ++p) c *= -g0;
            d[j] += n[k] * c;
            binom = binom * j / (k - j + 1.0);
        }
    }
    const double ua = g0 + g1 * a;
    const double ub = g0 + g1 * b;
    auto anti = [&](double u) {
        return d[4] * u * u * u / 3.0 + d[3] * u * u / 2.0 + d[2] * u
             + d[1] * std::log(u) - d[0] / u;
    };
    return lam_part + inv_g1 * (anti(ub) - anti(ua));
}

} // namespace detail

/// Exact integral of lambda + ((mu - lambda*beta)/sigma)^2 over [a, b].
/// This exponent drives the positivity floor of the weight ODE and the
/// epsilon guard of the solver.
inline double risk_exponent_integral(const MarketModel& m, double a, double b) {
    if (a == b) return 0.0;
    std::vector<double> cuts;
    m.mu.collect_breakpoints(a, b, cuts);
    m.sigma.collect_breakpoints(a, b, cuts);
    m.beta.collect_breakpoints(a, b, cuts);
    m.lambda.collect_breakpoints(a, b, cuts);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    double lo = a;
    for (double hi : cuts) {
        if (!(hi > lo)) continue;
        sum += detail::risk_exponent_segment(m, lo, hi);
        lo = hi;
    }
    return sum;
}

/// Claim H = h_b on {T < tau} and h_a(tau) on {tau <= T}.
struct ClaimSpec {
    double h_b = 0.0;
    Curve h_a;

    /// Seller of a protection policy: premium p received at 0, loss L paid at
    /// the default time.
    static ClaimSpec insurance(double p, double L) {
        validate_scalar(p, "insurance premium");
        validate_scalar(L, "insurance loss");
        return ClaimSpec{p, Curve::constant(p - L)};
    }

    /// Lender's position: amount A lent over [0, T] at per-period rate r,
    /// repaid in n equal installments of (1+r)^n A / n. The survival payoff is
    /// the accrued interest; on default the k paid installments are kept and
    /// the principal is lost.
    static ClaimSpec credit(int n, double r, double A, double T) {
        if (n < 1) throw ValidationError("credit claim: n must be >= 1");
        validate_scalar(r, "credit rate");
        validate_scalar(A, "credit notional");
        const double growth = std::pow(1.0 + r, n);
        std::vector<CurveNode> nodes;
        nodes.push_back({0.0, 0.0});
        for (int k = 1; k <= n - 1; ++k)
            nodes.push_back({k * T / n, (k * growth / n - 1.0) * A});
        return ClaimSpec{(growth - 1.0) * A,
                         Curve(std::move(nodes), Interp::PiecewiseConstant)};
    }

    static ClaimSpec custom(double h_b, Curve h_a) {
        validate_scalar(h_b, "claim h_b");
        for (const auto& node : h_a.nodes())
            if (!std::isfinite(node.v))
                throw ValidationError("claim: h_a must be bounded");
        return ClaimSpec{h_b, std::move(h_a)};
    }

    /// A piecewise-constant after-default payoff with several nodes is
    /// discontinuous in the default time; accepted, but worth surfacing.
    bool h_a_discontinuous() const {
        return h_a.interpolation() == Interp::PiecewiseConstant && h_a.nodes().size() > 1;
    }

private:
    static void validate_scalar(double v, const char* what) {
        if (!std::isfinite(v))
            throw ValidationError(std::string("claim: ") + what + " must be finite");
    }
};

/// Payoff realized at the random horizon T ^ tau. Pass
/// tau = +infinity for "no default ever".
inline double claim_payoff(const ClaimSpec& claim, double tau, double T) {
    return tau > T ? claim.h_b : claim.h_a.value(tau);
}

} // namespace mvh
