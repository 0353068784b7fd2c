#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mvh/montecarlo.hpp"

namespace mvh {

/// Coefficients of the compensator drift K(pi) = a pi^2 + b pi + c at one
/// (time, wealth) state. Nonnegative with minimum zero at the optimal
/// allocation when evaluated on lifted solution states.
struct DriftQuadratic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double eval(double pi) const { return (a * pi + b) * pi + c; }
    double argmin() const { return -b / (2.0 * a); }
    double minimum() const { return c - b * b / (4.0 * a); }
    double scale() const { return std::max(1.0, std::abs(a) + std::abs(b) + std::abs(c)); }
};

/// Drift quadratic with the paper's coefficient formulas and the
/// implemented drivers substituted. pre_default=false zeroes the jump
/// intensity (the no-jump reduction); after the default the wealth is
/// stopped and the drift identity is vacuous.
inline DriftQuadratic drift_quadratic(double t, double v_minus, const FSolution& sol,
                                      const MarketModel& m, const ClaimSpec& claim,
                                      bool pre_default) {
    const Coefficients c = eval_coeffs(m, t);
    const double lam_g = pre_default ? c.lambda : 0.0;
    const double yb = interpolate(sol, FComponent::Weight, t);
    const double yc = interpolate(sol, FComponent::Target, t);
    const double ups = interpolate(sol, FComponent::Residual, t);
    const GTriple w{yb, 0.0, 1.0 - yb};
    const GTriple g{yc, 0.0, claim.h_a.value(t) - yc};
    const double x_gap = v_minus - yc;

    const double f_val = g_driver_f(c, lam_g, w.y, w.z, w.u);
    const double g_val = g_driver_g(c, lam_g, w, g.y, g.z, g.u);
    const double h_val = g_driver_h(c, lam_g, w, g);

    DriftQuadratic q;
    q.a = c.sigma * c.sigma * w.y + lam_g * c.beta * c.beta * (w.u + w.y);
    q.b = 2.0 * x_gap * (c.mu * w.y + c.sigma * w.z + lam_g * c.beta * w.u)
        - 2.0 * c.sigma * w.y * g.z - 2.0 * lam_g * c.beta * g.u * (w.y + w.u);
    q.c = -f_val * x_gap * x_gap
        + 2.0 * x_gap * (w.y * g_val - w.z * g.z - lam_g * w.u * g.u)
        + w.y * g.z * g.z + lam_g * g.u * g.u * (w.u + w.y) - h_val;
    (void)ups;
    return q;
}

/// Residuals of the three driver-defining identities. Zero by construction
/// of the drivers; evaluating them checks the transcription.
struct FrakResiduals {
    double a_res = 0.0;
    double b_res = 0.0;
    double c_res = 0.0;

    double max_abs() const {
        return std::max(std::abs(a_res), std::max(std::abs(b_res), std::abs(c_res)));
    }
};

inline FrakResiduals frak_residuals(const MarketModel& m, double t, double lam_g,
                                    const GTriple& w, const GTriple& g) {
    const Coefficients c = eval_coeffs(m, t);
    const double den = c.sigma * c.sigma * w.y + lam_g * c.beta * c.beta * (w.u + w.y);
    const double gw = c.mu * w.y + c.sigma * w.z + lam_g * c.beta * w.u;
    const double mix = c.sigma * w.y * g.z + lam_g * c.beta * g.u * (w.u + w.y);
    const double f_val = g_driver_f(c, lam_g, w.y, w.z, w.u);
    const double g_val = g_driver_g(c, lam_g, w, g.y, g.z, g.u);
    const double h_val = g_driver_h(c, lam_g, w, g);

    FrakResiduals r;
    r.a_res = -f_val - gw * gw / den;
    r.b_res = 2.0 * (gw * (lam_g * c.beta * g.u * (w.y + w.u) + c.sigma * w.y * g.z) / den
                     + g_val * w.y - w.z * g.z - lam_g * w.u * g.u);
    r.c_res = -h_val + g.z * g.z * w.y + lam_g * (w.u + w.y) * g.u * g.u - mix * mix / den;
    return r;
}

/// One named check with its measured value and decision threshold.
struct CheckRow {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct DiagnosticsReport {
    std::vector<CheckRow> rows;

    void add(CheckRow row) {
        for (const auto& r : rows)
            if (r.name == row.name)
                throw ValidationError("diagnostics: duplicate check " + row.name);
        rows.push_back(std::move(row));
    }
    bool all_pass() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return true;
    }
};

/// Flatness of the mean J-curve of the optimal strategy: the largest
/// z-score of mean(J_t) against the deterministic J_0.
inline CheckRow jcurve_flatness_row(const std::string& name, double j0,
                                    const std::vector<Estimate>& estimates) {
    double worst = 0.0;
    for (const auto& e : estimates) {
        const double se = e.std_error > 0.0 ? e.std_error : 1e-300;
        worst = std::max(worst, std::abs(e.mean - j0) / se);
    }
    return CheckRow{name, worst, 3.0, worst <= 3.0};
}

/// Monotone trend of a suboptimal J-curve: the smallest paired z-score of
/// mean(J_t) - mean(J_s) over ordered probe pairs (common random numbers).
inline CheckRow jcurve_monotone_row(const std::string& name,
                                    const std::vector<std::vector<double>>& samples) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples.size(); ++s) {
        for (std::size_t t = s + 1; t < samples.size(); ++t) {
            std::vector<double> diff(samples[s].size());
            for (std::size_t i = 0; i < diff.size(); ++i)
                diff[i] = samples[t][i] - samples[s][i];
            const Estimate e = detail::reduce_estimate(diff);
            const double se = e.std_error > 0.0 ? e.std_error : 1e-300;
            worst = std::min(worst, e.mean / se);
        }
    }
    if (!std::isfinite(worst)) worst = 0.0;
    return CheckRow{name, worst, -3.0, worst >= -3.0};
}

/// No-jump reduction: with the intensity zeroed and the claim reduced to
/// its survival payoff, the optimal value collapses to
/// exp(-int mu^2/sigma^2) (x - h_b)^2.
inline CheckRow classical_limit_check(const MarketModel& m, const ClaimSpec& claim, double x,
                                      int n_steps) {
    const MarketModel m0 =
        build_market(m.horizon, m.s0, m.mu, m.sigma, m.beta, Curve::constant(0.0));
    const ClaimSpec c0 = ClaimSpec::custom(claim.h_b, Curve::constant(claim.h_b));
    const FSolution sol = solve_all(m0, c0, n_steps);
    const double gap = x - claim.h_b;
    const double closed = std::exp(-risk_exponent_integral(m0, 0.0, m0.horizon)) * gap * gap;
    const double err = std::abs(optimal_value(x, sol) - closed);
    return CheckRow{"classical_limit", err, 1e-8, err <= 1e-8};
}

struct VerifyOptions {
    int solve_steps = 2000;
    SimConfig sim{100000, 2000, 42};
    int n_state_probes = 1000;
    int n_jcurve_probes = 8;
};

/// The full diagnostics battery: solver invariants, drift algebra at random
/// states, the martingale-optimality statistics, and distributional checks.
inline DiagnosticsReport run_verification(const MarketModel& m, const ClaimSpec& claim,
                                          double x, const VerifyOptions& opt) {
    DiagnosticsReport rep;
    const FSolution sol = solve_all(m, claim, opt.solve_steps);
    const double T = m.horizon;

    // terminal exactness and sign/floor invariants
    const std::size_t last = sol.grid.times.size() - 1;
    rep.add({"terminal_weight", std::abs(sol.y_b[last] - 1.0), 0.0,
             sol.y_b[last] == 1.0});
    rep.add({"terminal_target", std::abs(sol.yc_b[last] - claim.h_b), 0.0,
             sol.yc_b[last] == claim.h_b});
    rep.add({"terminal_residual", std::abs(sol.ups_b[last]), 0.0, sol.ups_b[last] == 0.0});

    double floor_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= last; ++i)
        floor_margin = std::min(floor_margin,
                                sol.y_b[i] - weight_lower_bound(m, sol.grid.times[i]));
    rep.add({"weight_floor_margin", floor_margin, -1e-6, floor_margin >= -1e-6});

    double min_ups = std::numeric_limits<double>::infinity();
    for (double u : sol.ups_b) min_ups = std::min(min_ups, u);
    rep.add({"residual_nonneg", min_ups, -1e-12, min_ups >= -1e-12});
    rep.add({"guard_inactive", sol.guard_activated ? 1.0 : 0.0, 0.0, !sol.guard_activated});

    // drift algebra at random pre-default states
    {
        PathRng rng(opt.sim.seed, 0x7075657374ull);
        double min_a = std::numeric_limits<double>::infinity();
        double max_k_at_star = 0.0;
        double min_k = 0.0;
        double max_argmin_gap = 0.0;
        double max_frak = 0.0;
        for (int i = 0; i < opt.n_state_probes; ++i) {
            const double t = rng.uniform01() * T;
            const double v = x + 4.0 * (rng.uniform01() - 0.5);
            const DriftQuadratic q = drift_quadratic(t, v, sol, m, claim, true);
            const double pi_opt = pi_star(t, v, sol, m, claim, true);
            const double sc = q.scale();
            min_a = std::min(min_a, q.a);
            max_k_at_star = std::max(max_k_at_star, std::abs(q.eval(pi_opt)) / sc);
            min_k = std::min(min_k, q.minimum() / sc);
            max_argmin_gap =
                std::max(max_argmin_gap,
                         std::abs(q.argmin() - pi_opt) / std::max(1.0, std::abs(pi_opt)));
            const Coefficients c = eval_coeffs(m, t);
            const double yb = interpolate(sol, FComponent::Weight, t);
            const double yc = interpolate(sol, FComponent::Target, t);
            const GTriple w{yb, 0.0, 1.0 - yb};
            const GTriple g{yc, 0.0, claim.h_a.value(t) - yc};
            max_frak = std::max(max_frak,
                                frak_residuals(m, t, c.lambda, w, g).max_abs() / sc);
        }
        rep.add({"drift_a_positive", min_a, 0.0, min_a > 0.0});
        rep.add({"k_at_pi_star", max_k_at_star, 1e-10, max_k_at_star <= 1e-10});
        rep.add({"k_nonnegative", min_k, -1e-10, min_k >= -1e-10});
        rep.add({"argmin_matches_pi_star", max_argmin_gap, 1e-10, max_argmin_gap <= 1e-10});
        rep.add({"frak_residuals", max_frak, 1e-12, max_frak <= 1e-12});
    }

    rep.add(classical_limit_check(m, claim, x, opt.solve_steps));

    // Monte Carlo verification: value match and optimality dominance under
    // common random numbers
    {
        std::vector<StrategyKind> kinds{StrategyKind::optimal(),
                                        StrategyKind::perturbed(0.05),
                                        StrategyKind::perturbed(-0.05),
                                        StrategyKind::perturbed(0.2),
                                        StrategyKind::perturbed(-0.2)};
        const MseComparison cmp = compare_mse(m, claim, sol, kinds, x, opt.sim);
        const double value = optimal_value(x, sol);
        const Estimate& opt_mse = cmp.per_kind[0];
        const double se = opt_mse.std_error > 0.0 ? opt_mse.std_error : 1e-300;
        const double z = std::abs(opt_mse.mean - value) / se;
        rep.add({"mse_matches_value", z, 3.0, z <= 3.0});
        const char* names[] = {nullptr, "dominance_eps_+0.05", "dominance_eps_-0.05",
                               "dominance_eps_+0.20", "dominance_eps_-0.20"};
        for (std::size_t k = 1; k < kinds.size(); ++k) {
            const Estimate& d = cmp.diff_vs_first[k];
            const double dse = d.std_error > 0.0 ? d.std_error : 1e-300;
            const double dz = d.mean / dse;
            rep.add({names[k], dz, -3.0, dz >= -3.0});
        }
        for (std::size_t k = 3; k < kinds.size(); ++k) {
            const Estimate& d = cmp.diff_vs_first[k];
            const double dse = d.std_error > 0.0 ? d.std_error : 1e-300;
            const double dz = d.mean / dse;
            const std::string name =
                (k == 3) ? "strict_gain_eps_+0.20" : "strict_gain_eps_-0.20";
            rep.add({name, dz, 3.0, dz > 3.0});
        }
    }

    // martingale / submartingale J-curves
    {
        std::vector<double> probes;
        for (int k = 1; k <= opt.n_jcurve_probes; ++k)
            probes.push_back(T * static_cast<double>(k) / opt.n_jcurve_probes);
        const double j0 = optimal_value(x, sol);
        const auto opt_curve = estimate_j_curve(m, claim, sol, StrategyKind::optimal(), x,
                                                opt.sim, probes);
        rep.add(jcurve_flatness_row("jcurve_flat_optimal", j0, opt_curve));
        const auto zero_samples = j_curve_samples(m, claim, sol, StrategyKind::constant(0.0),
                                                  x, opt.sim, probes);
        rep.add(jcurve_monotone_row("jcurve_monotone_constant0", zero_samples));
    }

    // distributional sanity
    {
        const ModelStats st = model_statistics(m, claim, opt.sim);
        const double se_f = st.default_freq.std_error > 0.0 ? st.default_freq.std_error : 1e-300;
        const double zf = std::abs(st.default_freq.mean - st.expected_default_prob) / se_f;
        rep.add({"default_frequency", zf, 3.0, zf <= 3.0});
        const double zv = std::abs(st.sum_dw_var - T) / st.var_std_error;
        rep.add({"brownian_variance", zv, 3.0, zv <= 3.0});
    }

    return rep;
}

} // namespace mvh
