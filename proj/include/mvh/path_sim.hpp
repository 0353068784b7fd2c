#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mvh/fsolver.hpp"
#include "mvh/market.hpp"

namespace mvh {

struct SimConfig {
    long n_paths = 10000;
    int n_steps = 2000;
    std::uint64_t seed = 42;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace detail

/// Per-path random stream: xoshiro256++ keyed by (master seed, path index)
/// through a splitmix64 expansion. A path's draws depend only on that pair,
/// so results do not depend on how paths are distributed over workers, and
/// the std library's unspecified distribution algorithms are avoided.
class PathRng {
public:
    PathRng(std::uint64_t master_seed, std::uint64_t path_index) {
        std::uint64_t key = master_seed ^ (0x9e3779b97f4a7c15ull * (path_index + 1));
        for (auto& word : s_) word = detail::splitmix64(key);
        has_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform draw in the open interval (0, 1).
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (deterministic across platforms).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform01()));
        const double a = 6.283185307179586476925286766559 * uniform01();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
    bool has_spare_;
    double spare_;
};

/// Default time by exact inverse-compensator sampling:
/// tau = inf{t : Lambda(t) >= E} with E = -log(U). Returns +infinity when
/// Lambda(T) < E, i.e. no default before the horizon.
inline double sample_default(const MarketModel& m, double uniform_draw) {
    const double target = -std::log(uniform_draw);
    const double T = m.horizon;
    std::vector<double> cuts;
    m.lambda.collect_breakpoints(0.0, T, cuts);
    cuts.push_back(T);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    double lo = 0.0;
    for (double hi : cuts) {
        if (!(hi > lo)) continue;
        double l0, l1;
        m.lambda.local_linear(lo, hi, l0, l1);
        const double lam_lo = l0 + l1 * lo;
        const double gain = lam_lo * (hi - lo) + 0.5 * l1 * (hi - lo) * (hi - lo);
        if (acc + gain >= target) {
            const double rem = target - acc;
            if (rem <= 0.0) return lo;
            // solve lam_lo*s + l1*s^2/2 = rem on [0, hi-lo]; the stable root is
            // s = 2*rem / (lam_lo + sqrt(lam_lo^2 + 2*l1*rem))
            const double disc = lam_lo * lam_lo + 2.0 * l1 * rem;
            const double s = 2.0 * rem / (lam_lo + std::sqrt(std::max(disc, 0.0)));
            return std::min(lo + s, hi);
        }
        acc += gain;
        lo = hi;
    }
    return std::numeric_limits<double>::infinity();
}

/// Simulation mesh: solver-style mesh (uniform + curve nodes) optionally
/// refined with probe times, with exact per-interval price integrals
/// precomputed once and shared across paths.
struct SimMesh {
    std::vector<double> times;
    std::vector<double> drift_int; // int (mu - lambda*beta) per interval
    std::vector<double> var_int;   // int sigma^2 per interval

    static SimMesh build(const MarketModel& m, const ClaimSpec& claim, int n_steps,
                         std::vector<double> extra = {}) {
        SimMesh mesh;
        SolverGrid g = SolverGrid::build(m, claim, n_steps);
        if (!extra.empty()) {
            for (double t : extra)
                if (t > 0.0 && t < m.horizon) g.times.push_back(t);
            std::sort(g.times.begin(), g.times.end());
            std::vector<double> dedup;
            const double tol = 1e-12 * std::max(1.0, m.horizon);
            for (double t : g.times)
                if (dedup.empty() || t - dedup.back() > tol) dedup.push_back(t);
            g.times = std::move(dedup);
        }
        mesh.times = std::move(g.times);
        const std::size_t n = mesh.times.size() - 1;
        mesh.drift_int.resize(n);
        mesh.var_int.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = mesh.times[i], b = mesh.times[i + 1];
            mesh.drift_int[i] = m.mu.integral(a, b) - integral_product(m.lambda, m.beta, a, b);
            mesh.var_int[i] = integral_product(m.sigma, m.sigma, a, b);
        }
        return mesh;
    }

    std::size_t find_index(double t) const {
        auto it = std::lower_bound(times.begin(), times.end(), t);
        return static_cast<std::size_t>(it - times.begin());
    }
};

/// One simulated scenario. The mesh is the base mesh with the default time
/// inserted exactly (no jump smearing); Brownian increments run over the
/// whole horizon while the price is frozen after T ^ tau.
struct MarketPath {
    std::vector<double> times;
    std::vector<double> dw; // dw[i] over [times[i], times[i+1]]
    double tau = std::numeric_limits<double>::infinity();
    std::vector<double> s;          // price per mesh point (may be empty)
    std::vector<unsigned char> n;   // jump indicator per mesh point
    std::size_t stop_index = 0;     // index of T ^ tau in times
    std::size_t split_index = static_cast<std::size_t>(-1); // where tau was inserted

    bool defaulted() const { return std::isfinite(tau); }
};

/// Simulate into a caller-owned buffer (reused across paths by estimators).
/// Draw order: one uniform for tau, then one normal per interval in time
/// order, making every path a pure function of (seed, path index).
inline void simulate_path_into(MarketPath& out, const MarketModel& m, const SimMesh& mesh,
                               PathRng& rng, bool with_price = true) {
    const double T = m.horizon;
    const double tau = sample_default(m, rng.uniform01());
    const std::size_t base_n = mesh.times.size();

    out.tau = tau;
    out.times.assign(mesh.times.begin(), mesh.times.end());
    out.split_index = static_cast<std::size_t>(-1);
    if (tau <= T) {
        const std::size_t j = mesh.find_index(tau);
        if (j < base_n && mesh.times[j] == tau) {
            out.stop_index = j;
        } else {
            out.times.insert(out.times.begin() + static_cast<std::ptrdiff_t>(j), tau);
            out.split_index = j;
            out.stop_index = j;
        }
    } else {
        out.stop_index = base_n - 1;
    }

    const std::size_t n_int = out.times.size() - 1;
    out.dw.resize(n_int);
    for (std::size_t i = 0; i < n_int; ++i) {
        const double dt = out.times[i + 1] - out.times[i];
        out.dw[i] = std::sqrt(dt) * rng.normal();
    }

    out.n.resize(out.times.size());
    for (std::size_t i = 0; i < out.times.size(); ++i)
        out.n[i] = (out.times[i] >= tau) ? 1 : 0;

    if (!with_price) {
        out.s.clear();
        return;
    }
    out.s.resize(out.times.size());
    out.s[0] = m.s0;
    for (std::size_t i = 0; i < n_int; ++i) {
        if (i >= out.stop_index) {
            out.s[i + 1] = out.s[i];
            continue;
        }
        double drift, var;
        const std::size_t k = (out.split_index == static_cast<std::size_t>(-1) ||
                               i < out.split_index)
                                  ? i
                                  : i - 1;
        if (out.split_index != static_cast<std::size_t>(-1) &&
            (i + 1 == out.split_index || i == out.split_index)) {
            const double a = out.times[i], b = out.times[i + 1];
            drift = m.mu.integral(a, b) - integral_product(m.lambda, m.beta, a, b);
            var = integral_product(m.sigma, m.sigma, a, b);
        } else {
            drift = mesh.drift_int[k];
            var = mesh.var_int[k];
        }
        const double dt = out.times[i + 1] - out.times[i];
        const double vol_rms = dt > 0.0 ? std::sqrt(var / dt) : 0.0;
        out.s[i + 1] = out.s[i] * std::exp(drift - 0.5 * var + vol_rms * out.dw[i]);
        if (i + 1 == out.stop_index && tau <= T) {
            // multiplicative jump by (1 + beta) with the predictable beta
            out.s[i + 1] *= 1.0 + m.beta.value_left(tau);
        }
    }
}

inline MarketPath simulate_path(const MarketModel& m, const SimMesh& mesh, PathRng& rng,
                                bool with_price = true) {
    MarketPath p;
    simulate_path_into(p, m, mesh, rng, with_price);
    return p;
}

} // namespace mvh
