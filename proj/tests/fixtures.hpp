#pragma once

#include <algorithm>
#include <vector>

#include "mvh/market.hpp"
#include "mvh/path_sim.hpp"

namespace fixtures {

/// The standing fixture: constant coefficients with a one-jump intensity.
inline mvh::MarketModel constants_market() {
    return mvh::build_market(1.0, 1.0, mvh::Curve::constant(0.05), mvh::Curve::constant(0.2),
                             mvh::Curve::constant(-0.5), mvh::Curve::constant(0.3));
}

inline mvh::ClaimSpec insurance_claim() { return mvh::ClaimSpec::insurance(1.0, 0.8); }

/// No-jump market (classical mean-variance setting).
inline mvh::MarketModel nojump_market(double mu = 0.05, double sigma = 0.2) {
    return mvh::build_market(1.0, 1.0, mvh::Curve::constant(mu), mvh::Curve::constant(sigma),
                             mvh::Curve::constant(0.0), mvh::Curve::constant(0.0));
}

/// Market with piecewise coefficient curves (exercises node-aligned meshes).
inline mvh::MarketModel piecewise_market() {
    using mvh::Curve;
    using mvh::Interp;
    Curve mu({{0.0, 0.05}, {0.4, 0.02}}, Interp::PiecewiseConstant);
    Curve sigma({{0.0, 0.15}, {1.0, 0.3}}, Interp::PiecewiseLinear);
    Curve beta({{0.0, -0.4}, {0.6, 0.5}}, Interp::PiecewiseConstant);
    Curve lambda({{0.0, 0.2}, {0.5, 0.4}}, Interp::PiecewiseConstant);
    return mvh::build_market(1.0, 1.0, mu, sigma, beta, lambda);
}

inline mvh::ClaimSpec credit_claim() { return mvh::ClaimSpec::credit(2, 0.05, 100.0, 1.0); }

/// Snap a default time onto the fine uniform mesh (levels then share it).
inline double snap_tau(double tau, double T, int fine_steps) {
    if (!(tau <= T)) return tau;
    long k = std::lround(tau / T * fine_steps);
    k = std::max(1L, std::min(static_cast<long>(fine_steps), k));
    return T * static_cast<double>(k) / fine_steps;
}

/// Hand-built path on a uniform mesh refined from shared fine increments.
/// tau must already be snapped via snap_tau; level_steps must divide
/// fine_steps.
inline mvh::MarketPath refined_path(const mvh::MarketModel& m,
                                    const std::vector<double>& fine_dw, double tau,
                                    int fine_steps, int level_steps) {
    const double T = m.horizon;
    const int ratio = fine_steps / level_steps;
    mvh::MarketPath p;
    p.tau = tau;
    p.split_index = static_cast<std::size_t>(-1);
    long tau_fine = -1;
    if (tau <= T) tau_fine = std::lround(tau / T * fine_steps);

    p.times.push_back(0.0);
    double acc = 0.0;
    for (int f = 0; f < fine_steps; ++f) {
        acc += fine_dw[static_cast<std::size_t>(f)];
        const bool coarse_point = ((f + 1) % ratio) == 0;
        const bool tau_point = (static_cast<long>(f + 1) == tau_fine);
        if (coarse_point || tau_point) {
            p.times.push_back(T * static_cast<double>(f + 1) / fine_steps);
            p.dw.push_back(acc);
            acc = 0.0;
            if (tau_point) {
                p.stop_index = p.times.size() - 1;
                if (!coarse_point) p.split_index = p.stop_index;
            }
        }
    }
    if (tau > T) p.stop_index = p.times.size() - 1;
    p.n.resize(p.times.size());
    for (std::size_t i = 0; i < p.times.size(); ++i) p.n[i] = (p.times[i] >= p.tau) ? 1 : 0;
    return p;
}

} // namespace fixtures
