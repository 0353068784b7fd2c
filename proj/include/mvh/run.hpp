#pragma once

#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "mvh/config.hpp"
#include "mvh/table.hpp"
#include "mvh/verify.hpp"

namespace mvh {

inline const char* version_string() { return "0.1.0"; }

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<long> paths;
    std::optional<int> steps;
    std::string format = "csv"; // csv | json
};

namespace detail_run {

inline ResultTable make_table(const std::string& subcommand, const std::string& config_text,
                              const ExperimentConfig& cfg, const ClaimSpec& claim) {
    ResultTable t;
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(config_text);
    t.add_provenance("tool", std::string("mvh ") + version_string());
    t.add_provenance("subcommand", subcommand);
    t.add_provenance("config_hash", hash.str());
    t.add_provenance("seed", std::to_string(cfg.sim.seed));
    if (claim.h_a_discontinuous())
        t.add_provenance("note", "after-default payoff h_a is piecewise-constant "
                                 "(discontinuous in the default time)");
    return t;
}

inline void apply_sweep_param(ExperimentConfig& cfg, const std::string& param, double value) {
    if (param == "x") cfg.x = value;
    else if (param == "mu") cfg.mu = Curve::constant(value);
    else if (param == "sigma") cfg.sigma = Curve::constant(value);
    else if (param == "beta") cfg.beta = Curve::constant(value);
    else if (param == "lambda") cfg.lambda = Curve::constant(value);
    else if (param == "p") cfg.claim.p = value;
    else if (param == "L") cfg.claim.L = value;
    else if (param == "h_b") cfg.claim.h_b = value;
    else
        throw ConfigError("sweep: unknown parameter '" + param +
                          "' (expected x, mu, sigma, beta, lambda, p, L or h_b)");
}

inline double sweep_value(const SweepSpec& s, int i) {
    if (s.count == 1) return s.from;
    return s.from + (s.to - s.from) * static_cast<double>(i) / (s.count - 1);
}

} // namespace detail_run

/// Execute one subcommand against a parsed config and write the result
/// table. Returns the process exit code: 0 on success (and all checks
/// passing), 2 when verification checks fail. Errors are thrown.
inline int run_subcommand(const std::string& subcommand, const std::string& config_text,
                          const RunOverrides& ov, std::ostream& out) {
    ExperimentConfig cfg = parse_config(config_text);
    if (ov.seed) cfg.sim.seed = *ov.seed;
    if (ov.paths) cfg.sim.n_paths = *ov.paths;
    if (ov.steps) {
        cfg.sim.n_steps = *ov.steps;
        cfg.solve_steps = *ov.steps;
    }
    const MarketModel model = build_model(cfg);
    const ClaimSpec claim = build_claim(cfg);
    ResultTable table = detail_run::make_table(subcommand, config_text, cfg, claim);
    int exit_code = 0;

    if (subcommand == "solve") {
        const FSolution sol = solve_all(model, claim, cfg.solve_steps);
        table.columns = {"t", "y_b", "yc_b", "ups_b"};
        for (std::size_t i = 0; i < sol.grid.times.size(); ++i)
            table.rows.push_back({Cell::number(sol.grid.times[i]), Cell::number(sol.y_b[i]),
                                  Cell::number(sol.yc_b[i]), Cell::number(sol.ups_b[i])});
    } else if (subcommand == "value") {
        const FSolution sol = solve_all(model, claim, cfg.solve_steps);
        table.columns = {"x", "y_b0", "yc_b0", "ups_b0", "value"};
        table.rows.push_back({Cell::number(cfg.x), Cell::number(sol.y_b.front()),
                              Cell::number(sol.yc_b.front()), Cell::number(sol.ups_b.front()),
                              Cell::number(optimal_value(cfg.x, sol))});
    } else if (subcommand == "simulate") {
        const FSolution sol = solve_all(model, claim, cfg.solve_steps);
        const MseComparison cmp =
            compare_mse(model, claim, sol, cfg.strategies, cfg.x, cfg.sim);
        table.columns = {"strategy", "mse_mean", "mse_std_error", "n_paths"};
        for (std::size_t k = 0; k < cfg.strategies.size(); ++k) {
            const Estimate& e = cmp.per_kind[k];
            table.rows.push_back({Cell::string(cfg.strategies[k].label()),
                                  Cell::number(e.mean), Cell::number(e.std_error),
                                  Cell::count(e.n_paths)});
        }
    } else if (subcommand == "verify") {
        VerifyOptions opt;
        opt.solve_steps = cfg.solve_steps;
        opt.sim = cfg.sim;
        opt.n_jcurve_probes = cfg.probe_count;
        const DiagnosticsReport rep = run_verification(model, claim, cfg.x, opt);
        table.columns = {"check", "value", "threshold", "pass"};
        for (const auto& row : rep.rows)
            table.rows.push_back({Cell::string(row.name), Cell::number(row.value),
                                  Cell::number(row.threshold), Cell::boolean(row.pass)});
        if (!rep.all_pass()) exit_code = 2;
    } else if (subcommand == "sweep") {
        if (!cfg.sweep1.active)
            throw ConfigError("sweep: no sweep parameter declared in [run]");
        table.columns = {cfg.sweep1.param};
        if (cfg.sweep2.active) table.columns.push_back(cfg.sweep2.param);
        table.columns.insert(table.columns.end(), {"y_b0", "yc_b0", "ups_b0", "value"});
        if (cfg.sweep_mse) {
            table.columns.push_back("mse_mean");
            table.columns.push_back("mse_std_error");
        }
        const int outer = cfg.sweep1.count;
        const int inner = cfg.sweep2.active ? cfg.sweep2.count : 1;
        for (int i = 0; i < outer; ++i) {
            for (int j = 0; j < inner; ++j) {
                ExperimentConfig point = cfg;
                const double v1 = detail_run::sweep_value(cfg.sweep1, i);
                detail_run::apply_sweep_param(point, cfg.sweep1.param, v1);
                double v2 = 0.0;
                if (cfg.sweep2.active) {
                    v2 = detail_run::sweep_value(cfg.sweep2, j);
                    detail_run::apply_sweep_param(point, cfg.sweep2.param, v2);
                }
                const MarketModel pm = build_model(point);
                const ClaimSpec pc = build_claim(point);
                const FSolution sol = solve_all(pm, pc, point.solve_steps);
                std::vector<Cell> row{Cell::number(v1)};
                if (cfg.sweep2.active) row.push_back(Cell::number(v2));
                row.push_back(Cell::number(sol.y_b.front()));
                row.push_back(Cell::number(sol.yc_b.front()));
                row.push_back(Cell::number(sol.ups_b.front()));
                row.push_back(Cell::number(optimal_value(point.x, sol)));
                if (cfg.sweep_mse) {
                    const Estimate e = estimate_mse(pm, pc, sol, StrategyKind::optimal(),
                                                    point.x, point.sim);
                    row.push_back(Cell::number(e.mean));
                    row.push_back(Cell::number(e.std_error));
                }
                table.rows.push_back(std::move(row));
            }
        }
    } else {
        throw ConfigError("unknown subcommand '" + subcommand +
                          "' (expected solve, value, simulate, verify or sweep)");
    }

    if (ov.format == "json") table.write_json(out);
    else if (ov.format == "csv") table.write_csv(out);
    else throw ConfigError("unknown output format '" + ov.format + "'");
    return exit_code;
}

} // namespace mvh
