#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

#include "mvh/strategy.hpp"

namespace mvh {

/// Monte Carlo statistic: sample mean, standard error of the mean, count.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_paths = 0;
};

inline std::atomic<int>& detail_worker_override() {
    static std::atomic<int> v{0};
    return v;
}

/// Force a worker count (0 restores the default). The MVH_WORKERS
/// environment variable provides the same override externally.
inline void set_worker_override(int n) { detail_worker_override().store(n); }

inline int worker_count() {
    const int forced = detail_worker_override().load();
    if (forced > 0) return forced;
    if (const char* env = std::getenv("MVH_WORKERS")) {
        const int k = std::atoi(env);
        if (k > 0) return k;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace detail {

/// Run fn(begin, end) over disjoint path blocks, possibly from several
/// threads. Workers only write per-path slots, so the result is independent
/// of the thread count; reductions happen afterwards in path order.
template <typename Fn>
void parallel_paths(long n, Fn&& fn) {
    const int workers = worker_count();
    if (workers <= 1 || n < 256) {
        fn(0L, n);
        return;
    }
    std::atomic<long> next{0};
    const long chunk = std::max(64L, n / (workers * 16));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const long b = next.fetch_add(chunk);
                if (b >= n) break;
                fn(b, std::min(b + chunk, n));
            }
        });
    }
    for (auto& th : pool) th.join();
}

/// Compensated two-pass mean/stderr in fixed path order (bit-stable).
inline Estimate reduce_estimate(const std::vector<double>& vals) {
    Estimate e;
    e.n_paths = static_cast<long>(vals.size());
    if (vals.empty()) return e;
    KahanSum s;
    for (double v : vals) s.add(v);
    e.mean = s.value() / static_cast<double>(vals.size());
    if (vals.size() > 1) {
        KahanSum q;
        for (double v : vals) {
            const double d = v - e.mean;
            q.add(d * d);
        }
        const double var = q.value() / static_cast<double>(vals.size() - 1);
        e.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(vals.size()));
    }
    return e;
}

} // namespace detail

/// Mean-square hedging errors of several strategies on common random
/// numbers, plus paired differences against the first strategy.
struct MseComparison {
    std::vector<Estimate> per_kind;
    std::vector<Estimate> diff_vs_first; // entry k: kind_k - kind_0
};

inline MseComparison compare_mse(const MarketModel& m, const ClaimSpec& claim,
                                 const FSolution& sol, const std::vector<StrategyKind>& kinds,
                                 double x, const SimConfig& sim) {
    if (sim.n_paths < 1) throw ValidationError("simulation: n_paths must be >= 1");
    const SimMesh mesh = SimMesh::build(m, claim, sim.n_steps);
    const HedgeTables tables = HedgeTables::build(mesh.times, sol, m, claim);
    const std::size_t n_kinds = kinds.size();
    std::vector<std::vector<double>> sq_err(n_kinds);
    for (auto& v : sq_err) v.resize(static_cast<std::size_t>(sim.n_paths));

    detail::parallel_paths(sim.n_paths, [&](long begin, long end) {
        MarketPath path;
        for (long i = begin; i < end; ++i) {
            PathRng rng(sim.seed, static_cast<std::uint64_t>(i));
            simulate_path_into(path, m, mesh, rng, false);
            const double payoff = claim_payoff(claim, path.tau, m.horizon);
            for (std::size_t k = 0; k < n_kinds; ++k) {
                const double v_final =
                    detail::evolve_wealth(path, kinds[k], x, tables, sol, m, claim);
                const double err = v_final - payoff;
                sq_err[k][static_cast<std::size_t>(i)] = err * err;
            }
        }
    });

    MseComparison out;
    out.per_kind.reserve(n_kinds);
    out.diff_vs_first.reserve(n_kinds);
    for (std::size_t k = 0; k < n_kinds; ++k)
        out.per_kind.push_back(detail::reduce_estimate(sq_err[k]));
    std::vector<double> diff(static_cast<std::size_t>(sim.n_paths));
    for (std::size_t k = 0; k < n_kinds; ++k) {
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = sq_err[k][i] - sq_err[0][i];
        out.diff_vs_first.push_back(detail::reduce_estimate(diff));
    }
    return out;
}

/// Mean and standard error of |V_{T^tau} - H|^2 under one strategy.
/// Deterministic given (seed, n_paths, n_steps) regardless of worker count.
inline Estimate estimate_mse(const MarketModel& m, const ClaimSpec& claim, const FSolution& sol,
                             const StrategyKind& kind, double x, const SimConfig& sim) {
    return compare_mse(m, claim, sol, {kind}, x, sim).per_kind.front();
}

/// Per-path samples of J^pi at each probe time (probes x paths). J equals
/// weight * (V_{t^tau} - target)^2 + residual before the default and the
/// realized squared error (V_tau - h_a(tau))^2 from the default on.
inline std::vector<std::vector<double>> j_curve_samples(
    const MarketModel& m, const ClaimSpec& claim, const FSolution& sol,
    const StrategyKind& kind, double x, const SimConfig& sim,
    const std::vector<double>& probe_times) {
    const SimMesh mesh = SimMesh::build(m, claim, sim.n_steps, probe_times);
    const HedgeTables tables = HedgeTables::build(mesh.times, sol, m, claim);

    const double tol = 1e-12 * std::max(1.0, m.horizon);
    std::vector<std::size_t> probe_idx;
    for (double p : probe_times) {
        if (p < 0.0 || p > m.horizon)
            throw ValidationError("j-curve probe outside [0, T]");
        const std::size_t j = mesh.find_index(p - tol);
        if (j >= mesh.times.size() || std::abs(mesh.times[j] - p) > tol)
            throw ValidationError("j-curve probe missing from mesh");
        probe_idx.push_back(j);
    }

    std::vector<std::vector<double>> samples(probe_times.size());
    for (auto& v : samples) v.resize(static_cast<std::size_t>(sim.n_paths));

    detail::parallel_paths(sim.n_paths, [&](long begin, long end) {
        MarketPath path;
        std::vector<double> wealth;
        for (long i = begin; i < end; ++i) {
            PathRng rng(sim.seed, static_cast<std::uint64_t>(i));
            simulate_path_into(path, m, mesh, rng, false);
            const double v_final =
                detail::evolve_wealth(path, kind, x, tables, sol, m, claim, &wealth);
            for (std::size_t k = 0; k < probe_idx.size(); ++k) {
                const std::size_t b = probe_idx[k];
                const double t = mesh.times[b];
                double j_val;
                if (t >= path.tau) {
                    const double gap = v_final - claim.h_a.value(path.tau);
                    j_val = gap * gap;
                } else {
                    const std::size_t pi_idx =
                        (path.split_index != static_cast<std::size_t>(-1) &&
                         b >= path.split_index)
                            ? b + 1
                            : b;
                    const double gap = wealth[pi_idx] - tables.yc[b];
                    j_val = tables.yb[b] * gap * gap + tables.ups[b];
                }
                samples[k][static_cast<std::size_t>(i)] = j_val;
            }
        }
    });
    return samples;
}

inline std::vector<Estimate> estimate_j_curve(const MarketModel& m, const ClaimSpec& claim,
                                              const FSolution& sol, const StrategyKind& kind,
                                              double x, const SimConfig& sim,
                                              const std::vector<double>& probe_times) {
    const auto samples = j_curve_samples(m, claim, sol, kind, x, sim, probe_times);
    std::vector<Estimate> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(detail::reduce_estimate(s));
    return out;
}

/// Distributional sanity statistics: default frequency against
/// 1 - exp(-Lambda(T)) and the full-horizon Brownian sum against variance T.
struct ModelStats {
    Estimate default_freq;
    double expected_default_prob = 0.0;
    double sum_dw_mean = 0.0;
    double sum_dw_var = 0.0;
    double var_std_error = 0.0;
    long n_paths = 0;
};

inline ModelStats model_statistics(const MarketModel& m, const ClaimSpec& claim,
                                   const SimConfig& sim) {
    const SimMesh mesh = SimMesh::build(m, claim, sim.n_steps);
    std::vector<double> indicator(static_cast<std::size_t>(sim.n_paths));
    std::vector<double> sums(static_cast<std::size_t>(sim.n_paths));
    detail::parallel_paths(sim.n_paths, [&](long begin, long end) {
        MarketPath path;
        for (long i = begin; i < end; ++i) {
            PathRng rng(sim.seed, static_cast<std::uint64_t>(i));
            simulate_path_into(path, m, mesh, rng, false);
            indicator[static_cast<std::size_t>(i)] = (path.tau <= m.horizon) ? 1.0 : 0.0;
            KahanSum s;
            for (double dw : path.dw) s.add(dw);
            sums[static_cast<std::size_t>(i)] = s.value();
        }
    });
    ModelStats st;
    st.n_paths = sim.n_paths;
    st.default_freq = detail::reduce_estimate(indicator);
    const double p = st.default_freq.mean;
    st.default_freq.std_error =
        std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(sim.n_paths));
    st.expected_default_prob = 1.0 - std::exp(-cumulative_intensity(m, m.horizon));
    const Estimate sum_est = detail::reduce_estimate(sums);
    st.sum_dw_mean = sum_est.mean;
    // reduce_estimate's std_error = sqrt(var/n); recover the sample variance
    st.sum_dw_var = sum_est.std_error * sum_est.std_error * static_cast<double>(sim.n_paths);
    st.var_std_error =
        st.sum_dw_var * std::sqrt(2.0 / static_cast<double>(sim.n_paths - 1));
    return st;
}

} // namespace mvh
