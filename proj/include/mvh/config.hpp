#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mvh/montecarlo.hpp"
#include "mvh/strategy.hpp"

namespace mvh {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Claim section as declared: a named preset with its parameters, or custom
/// payoff data.
struct ClaimConfig {
    std::string preset = "custom"; // insurance | credit | custom
    double p = 0.0, L = 0.0;       // insurance
    int n = 1;                     // credit
    double r = 0.0, A = 0.0;
    double h_b = 0.0; // custom
    Curve h_a = Curve::constant(0.0);
};

struct SweepSpec {
    bool active = false;
    std::string param;
    double from = 0.0, to = 0.0;
    int count = 0;
};

/// Parsed experiment file. Round-trips through serialize() unchanged.
struct ExperimentConfig {
    double T = 1.0;
    double s0 = 1.0;
    Curve mu = Curve::constant(0.0);
    Curve sigma = Curve::constant(0.2);
    Curve beta = Curve::constant(0.0);
    Curve lambda = Curve::constant(0.0);
    ClaimConfig claim;
    int solve_steps = 2000;
    SimConfig sim{100000, 2000, 42};
    double x = 0.0;
    std::vector<StrategyKind> strategies;
    std::vector<double> probe_times; // explicit probes; empty -> probe_count
    int probe_count = 8;
    SweepSpec sweep1, sweep2;
    bool sweep_mse = false;
};

namespace detail_config {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double parse_number(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line) + ": expected a number, got '" +
                          s + "'");
    }
}

inline long parse_integer(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line) + ": expected an integer, got '" +
                          s + "'");
    }
}

/// Curve grammar: "constant <v>" | "pc nodes t:v,t:v,..." | "pl nodes ...".
inline Curve parse_curve(const std::string& text, int line) {
    std::istringstream in(text);
    std::string head;
    in >> head;
    if (head == "constant") {
        std::string rest;
        std::getline(in, rest);
        return Curve::constant(parse_number(trim(rest), line));
    }
    if (head == "pc" || head == "pl") {
        std::string nodes_kw;
        in >> nodes_kw;
        if (nodes_kw != "nodes")
            throw ConfigError("config line " + std::to_string(line) +
                              ": expected 'nodes' after curve kind");
        std::string rest;
        std::getline(in, rest);
        std::vector<CurveNode> nodes;
        for (const auto& item : split(trim(rest), ',')) {
            const auto parts = split(item, ':');
            if (parts.size() != 2)
                throw ConfigError("config line " + std::to_string(line) +
                                  ": malformed curve node '" + item + "'");
            nodes.push_back({parse_number(parts[0], line), parse_number(parts[1], line)});
        }
        try {
            return Curve(std::move(nodes),
                         head == "pc" ? Interp::PiecewiseConstant : Interp::PiecewiseLinear);
        } catch (const ValidationError& e) {
            throw ConfigError("config line " + std::to_string(line) + ": " + e.what());
        }
    }
    throw ConfigError("config line " + std::to_string(line) +
                      ": curve must start with 'constant', 'pc' or 'pl'");
}

inline StrategyKind parse_strategy(const std::string& text, int line) {
    const auto parts = split(text, ':');
    if (parts[0] == "optimal" && parts.size() == 1) return StrategyKind::optimal();
    if (parts.size() == 2) {
        const double v = parse_number(parts[1], line);
        if (parts[0] == "constant") return StrategyKind::constant(v);
        if (parts[0] == "proportional") return StrategyKind::proportional(v);
        if (parts[0] == "perturbed") return StrategyKind::perturbed(v);
    }
    throw ConfigError("config line " + std::to_string(line) + ": unknown strategy '" + text +
                      "'");
}

inline std::string curve_to_text(const Curve& c) {
    if (c.nodes().size() == 1) return "constant " + format17(c.nodes().front().v);
    std::string out = c.interpolation() == Interp::PiecewiseConstant ? "pc nodes " : "pl nodes ";
    bool first = true;
    for (const auto& n : c.nodes()) {
        if (!first) out += ",";
        out += format17(n.t) + ":" + format17(n.v);
        first = false;
    }
    return out;
}

inline std::string strategy_to_text(const StrategyKind& k) {
    switch (k.type) {
        case StrategyKind::Type::Optimal: return "optimal";
        case StrategyKind::Type::Constant: return "constant:" + format17(k.amount);
        case StrategyKind::Type::Proportional: return "proportional:" + format17(k.amount);
        case StrategyKind::Type::Perturbed: return "perturbed:" + format17(k.magnitude);
    }
    return "optimal";
}

} // namespace detail_config

/// Parse the line-oriented "key = value" format with [section] headers and
/// '#' comments. Unknown keys, malformed values, duplicate sections and
/// missing required sections are all first-error diagnostics with their
/// line number.
inline ExperimentConfig parse_config(const std::string& text) {
    using namespace detail_config;
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::string section;
    std::map<std::string, int> seen_sections;
    bool have_market = false, have_claim = false;
    bool claim_has_ha = false;

    while (std::getline(in, raw)) {
        ++line_no;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "market" && section != "claim" && section != "solve" &&
                section != "sim" && section != "run")
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unknown section [" + section + "]");
            if (seen_sections.count(section))
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": duplicate section [" + section + "], first at line " +
                                  std::to_string(seen_sections[section]));
            seen_sections[section] = line_no;
            if (section == "market") have_market = true;
            if (section == "claim") have_claim = true;
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": key outside any [section]");

        if (section == "market") {
            if (key == "T") cfg.T = parse_number(value, line_no);
            else if (key == "s0") cfg.s0 = parse_number(value, line_no);
            else if (key == "mu") cfg.mu = parse_curve(value, line_no);
            else if (key == "sigma") cfg.sigma = parse_curve(value, line_no);
            else if (key == "beta") cfg.beta = parse_curve(value, line_no);
            else if (key == "lambda") cfg.lambda = parse_curve(value, line_no);
            else
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "' in [market]");
        } else if (section == "claim") {
            if (key == "preset") {
                if (value != "insurance" && value != "credit" && value != "custom")
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": unknown claim preset '" + value + "'");
                cfg.claim.preset = value;
            } else if (key == "p") cfg.claim.p = parse_number(value, line_no);
            else if (key == "L") cfg.claim.L = parse_number(value, line_no);
            else if (key == "n") cfg.claim.n = static_cast<int>(parse_integer(value, line_no));
            else if (key == "r") cfg.claim.r = parse_number(value, line_no);
            else if (key == "A") cfg.claim.A = parse_number(value, line_no);
            else if (key == "h_b") cfg.claim.h_b = parse_number(value, line_no);
            else if (key == "h_a") { cfg.claim.h_a = parse_curve(value, line_no); claim_has_ha = true; }
            else
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "' in [claim]");
        } else if (section == "solve") {
            if (key == "n_steps")
                cfg.solve_steps = static_cast<int>(parse_integer(value, line_no));
            else
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "' in [solve]");
        } else if (section == "sim") {
            if (key == "n_paths") cfg.sim.n_paths = parse_integer(value, line_no);
            else if (key == "n_steps")
                cfg.sim.n_steps = static_cast<int>(parse_integer(value, line_no));
            else if (key == "seed")
                cfg.sim.seed = static_cast<std::uint64_t>(parse_integer(value, line_no));
            else
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "' in [sim]");
        } else if (section == "run") {
            if (key == "x") cfg.x = parse_number(value, line_no);
            else if (key == "strategies") {
                cfg.strategies.clear();
                for (const auto& item : split(value, ','))
                    cfg.strategies.push_back(parse_strategy(item, line_no));
            } else if (key == "probes") {
                if (value.find(',') == std::string::npos &&
                    value.find('.') == std::string::npos) {
                    cfg.probe_count = static_cast<int>(parse_integer(value, line_no));
                    cfg.probe_times.clear();
                } else {
                    cfg.probe_times.clear();
                    for (const auto& item : split(value, ','))
                        cfg.probe_times.push_back(parse_number(item, line_no));
                }
            } else if (key == "sweep" || key == "sweep2") {
                const auto parts = split(value, ':');
                if (parts.size() != 4)
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": sweep must be param:from:to:count");
                SweepSpec spec;
                spec.active = true;
                spec.param = parts[0];
                spec.from = parse_number(parts[1], line_no);
                spec.to = parse_number(parts[2], line_no);
                spec.count = static_cast<int>(parse_integer(parts[3], line_no));
                if (spec.count < 1)
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": sweep count must be >= 1");
                (key == "sweep" ? cfg.sweep1 : cfg.sweep2) = spec;
            } else if (key == "sweep_mse") {
                if (value == "true") cfg.sweep_mse = true;
                else if (value == "false") cfg.sweep_mse = false;
                else
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": sweep_mse must be true or false");
            } else
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "' in [run]");
        }
    }

    if (!have_market) throw ConfigError("config: missing required section [market]");
    if (!have_claim) throw ConfigError("config: missing required section [claim]");
    if (cfg.claim.preset == "custom" && !claim_has_ha)
        cfg.claim.h_a = Curve::constant(cfg.claim.h_b);
    if (cfg.strategies.empty()) cfg.strategies.push_back(StrategyKind::optimal());
    return cfg;
}

/// Build the validated market model; validation diagnostics name the
/// violated assumption.
inline MarketModel build_model(const ExperimentConfig& cfg) {
    return build_market(cfg.T, cfg.s0, cfg.mu, cfg.sigma, cfg.beta, cfg.lambda);
}

inline ClaimSpec build_claim(const ExperimentConfig& cfg) {
    if (cfg.claim.preset == "insurance") return ClaimSpec::insurance(cfg.claim.p, cfg.claim.L);
    if (cfg.claim.preset == "credit")
        return ClaimSpec::credit(cfg.claim.n, cfg.claim.r, cfg.claim.A, cfg.T);
    return ClaimSpec::custom(cfg.claim.h_b, cfg.claim.h_a);
}

/// Canonical serialization; parse(serialize(cfg)) reproduces cfg.
inline std::string serialize(const ExperimentConfig& cfg) {
    using namespace detail_config;
    std::ostringstream out;
    out << "[market]\n";
    out << "T = " << format17(cfg.T) << "\n";
    out << "s0 = " << format17(cfg.s0) << "\n";
    out << "mu = " << curve_to_text(cfg.mu) << "\n";
    out << "sigma = " << curve_to_text(cfg.sigma) << "\n";
    out << "beta = " << curve_to_text(cfg.beta) << "\n";
    out << "lambda = " << curve_to_text(cfg.lambda) << "\n";
    out << "\n[claim]\n";
    out << "preset = " << cfg.claim.preset << "\n";
    if (cfg.claim.preset == "insurance") {
        out << "p = " << format17(cfg.claim.p) << "\n";
        out << "L = " << format17(cfg.claim.L) << "\n";
    } else if (cfg.claim.preset == "credit") {
        out << "n = " << cfg.claim.n << "\n";
        out << "r = " << format17(cfg.claim.r) << "\n";
        out << "A = " << format17(cfg.claim.A) << "\n";
    } else {
        out << "h_b = " << format17(cfg.claim.h_b) << "\n";
        out << "h_a = " << curve_to_text(cfg.claim.h_a) << "\n";
    }
    out << "\n[solve]\n";
    out << "n_steps = " << cfg.solve_steps << "\n";
    out << "\n[sim]\n";
    out << "n_paths = " << cfg.sim.n_paths << "\n";
    out << "n_steps = " << cfg.sim.n_steps << "\n";
    out << "seed = " << cfg.sim.seed << "\n";
    out << "\n[run]\n";
    out << "x = " << format17(cfg.x) << "\n";
    out << "strategies = ";
    for (std::size_t i = 0; i < cfg.strategies.size(); ++i) {
        if (i) out << ", ";
        out << strategy_to_text(cfg.strategies[i]);
    }
    out << "\n";
    if (!cfg.probe_times.empty()) {
        out << "probes = ";
        for (std::size_t i = 0; i < cfg.probe_times.size(); ++i) {
            if (i) out << ",";
            out << format17(cfg.probe_times[i]);
        }
        out << "\n";
    } else {
        out << "probes = " << cfg.probe_count << "\n";
    }
    if (cfg.sweep1.active)
        out << "sweep = " << cfg.sweep1.param << ":" << format17(cfg.sweep1.from) << ":"
            << format17(cfg.sweep1.to) << ":" << cfg.sweep1.count << "\n";
    if (cfg.sweep2.active)
        out << "sweep2 = " << cfg.sweep2.param << ":" << format17(cfg.sweep2.from) << ":"
            << format17(cfg.sweep2.to) << ":" << cfg.sweep2.count << "\n";
    out << "sweep_mse = " << (cfg.sweep_mse ? "true" : "false") << "\n";
    return out.str();
}

} // namespace mvh
