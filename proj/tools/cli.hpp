#pragma once

// Command-line front end: scenario files, solve/sweep/simulate commands.
// Exit codes: 0 ok, 1 malformed input, 2 agreed rate not initiated,
// 3 Monte Carlo self-check failed (|z| > 4).

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "htlc/baseline.hpp"
#include "htlc/collateral.hpp"
#include "htlc/flexible.hpp"
#include "htlc/montecarlo.hpp"

namespace htlc::cli {

enum ExitCode : int { ok = 0, bad_input = 1, not_initiated = 2, self_check_failed = 3 };

/// Malformed scenario, sweep or flag value.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioFile {
    Scenario scenario = Scenario::defaults();
    double q = 0.0;
    bool has_collateral = false;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;

    CollateralScenario collateral() const { return {scenario, q}; }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

/// Line of `"key"` following `"group"` in the raw text; 0 if not found.
inline std::size_t locate(const std::string& text, const std::string& group, const std::string& key = {}) {
    std::size_t pos = text.find('"' + group + '"');
    if (pos == std::string::npos) return 0;
    if (!key.empty()) {
        pos = text.find('"' + key + '"', pos + group.size() + 2);
        if (pos == std::string::npos) return 0;
    }
    return line_col(text, pos).first;
}

using Setter = std::function<void(ScenarioFile&, double)>;

inline const std::map<std::string, Setter>& parameter_table() {
    static const std::map<std::string, Setter> table = {
        {"market.mu", [](ScenarioFile& f, double v) { f.scenario.market.mu = v; }},
        {"market.sigma", [](ScenarioFile& f, double v) { f.scenario.market.sigma = v; }},
        {"market.p0", [](ScenarioFile& f, double v) { f.scenario.market.p0 = v; }},
        {"alice.alpha", [](ScenarioFile& f, double v) { f.scenario.alice.alpha = v; }},
        {"alice.r", [](ScenarioFile& f, double v) { f.scenario.alice.r = v; }},
        {"bob.alpha", [](ScenarioFile& f, double v) { f.scenario.bob.alpha = v; }},
        {"bob.r", [](ScenarioFile& f, double v) { f.scenario.bob.r = v; }},
        {"chain.tau_a", [](ScenarioFile& f, double v) { f.scenario.timeline.tau_a = v; }},
        {"chain.tau_b", [](ScenarioFile& f, double v) { f.scenario.timeline.tau_b = v; }},
        {"chain.eps_b", [](ScenarioFile& f, double v) { f.scenario.timeline.eps_b = v; }},
        {"swap.p_star", [](ScenarioFile& f, double v) { f.scenario.p_star = v; }},
        {"collateral.q",
         [](ScenarioFile& f, double v) {
             f.q = v;
             f.has_collateral = true;
         }},
    };
    return table;
}

inline void validate(const ScenarioFile& f) {
    f.scenario.validate();
    if (!(f.q >= 0.0) || !std::isfinite(f.q)) throw DomainError("collateral.q must be >= 0");
    if (f.n && *f.n < 1) throw DomainError("sim.n must be >= 1");
}

}  // namespace detail

/// Strict parse: unknown keys, non-numeric values and out-of-domain
/// parameters are rejected with "source:line: field: message".
inline ScenarioFile parse_scenario(const std::string& text, const std::string& source = "<scenario>") {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        throw InputError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON: " +
                         e.what());
    }
    auto fail = [&](std::size_t line, const std::string& field, const std::string& msg) -> InputError {
        const std::string where = line ? source + ":" + std::to_string(line) : source;
        return InputError(where + ": " + field + ": " + msg);
    };
    if (!doc.is_object()) throw fail(1, "<root>", "expected a JSON object");

    static const std::map<std::string, std::vector<std::string>> schema = {
        {"market", {"mu", "sigma", "p0"}},   {"alice", {"alpha", "r"}}, {"bob", {"alpha", "r"}},
        {"chain", {"tau_a", "tau_b", "eps_b"}}, {"swap", {"p_star"}},     {"collateral", {"q"}},
        {"sim", {"n", "seed"}},
    };
    ScenarioFile out;
    const auto& params = detail::parameter_table();
    for (const auto& [group, body] : doc.items()) {
        const auto it = schema.find(group);
        if (it == schema.end()) throw fail(detail::locate(text, group), group, "unknown key");
        if (!body.is_object()) throw fail(detail::locate(text, group), group, "expected an object");
        if (group == "collateral") out.has_collateral = true;
        for (const auto& [key, value] : body.items()) {
            const std::string field = group + "." + key;
            const std::size_t line = detail::locate(text, group, key);
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                throw fail(line, field, "unknown key");
            if (!value.is_number()) throw fail(line, field, "expected a number");
            if (group == "sim") {
                if (!value.is_number_unsigned()) throw fail(line, field, "expected a non-negative integer");
                if (key == "n") out.n = value.get<std::size_t>();
                else out.seed = value.get<std::uint64_t>();
                continue;
            }
            params.at(field)(out, value.get<double>());
        }
    }
    try {
        detail::validate(out);
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        const std::string field = msg.substr(0, msg.find(' '));
        const auto dot = field.find('.');
        const std::size_t line =
            dot == std::string::npos ? 0 : detail::locate(text, field.substr(0, dot), field.substr(dot + 1));
        throw fail(line, field, msg.substr(msg.find(' ') + 1));
    }
    return out;
}

inline ScenarioFile load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path + ": cannot open scenario file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

struct SweepSpec {
    std::string path;
    std::vector<double> values;
};

namespace detail {

inline double parse_double(const std::string& s, const std::string& ctx) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ') ++first;
    while (last > first && last[-1] == ' ') --last;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) throw InputError(ctx + ": not a number: '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) return parts;
        start = pos + 1;
    }
}

}  // namespace detail

/// "path=start:stop:count" (linear grid, count >= 2) or "path=v1,v2,...".
inline SweepSpec parse_sweep(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) throw InputError("--sweep: expected path=values, got '" + arg + "'");
    SweepSpec spec;
    spec.path = arg.substr(0, eq);
    if (!detail::parameter_table().count(spec.path)) throw InputError("--sweep: unknown parameter path '" + spec.path + "'");
    const std::string rhs = arg.substr(eq + 1);
    const std::string ctx = "--sweep " + spec.path;
    if (rhs.find(':') != std::string::npos) {
        const auto parts = detail::split(rhs, ':');
        if (parts.size() != 3) throw InputError(ctx + ": expected start:stop:count");
        const double a = detail::parse_double(parts[0], ctx);
        const double b = detail::parse_double(parts[1], ctx);
        std::size_t count = 0;
        const auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), count);
        if (ec != std::errc() || ptr != parts[2].data() + parts[2].size()) throw InputError(ctx + ": bad count");
        if (count < 2) throw InputError(ctx + ": grid count must be >= 2");
        for (std::size_t i = 0; i < count; ++i)
            spec.values.push_back(i + 1 == count ? b : a + (b - a) * double(i) / double(count - 1));
    } else {
        for (const auto& p : detail::split(rhs, ',')) spec.values.push_back(detail::parse_double(p, ctx));
    }
    return spec;
}

/// Shortest round-trip-safe text at 9 significant digits, independent of
/// the global locale.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

inline std::string format_set(const IntervalSet& set) {
    if (set.empty()) return "empty";
    std::string s;
    for (const auto& iv : set) {
        if (!s.empty()) s += " U ";
        s += "(" + format_number(iv.lo) + ", " + format_number(iv.hi) + ")";
    }
    return s;
}

inline std::string format_range(const std::optional<Interval>& iv) {
    return iv ? format_set(IntervalSet({*iv})) : std::string("empty");
}

namespace detail {

/// Runs fn(i) for i < n on up to hardware_concurrency threads.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), unsigned(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

/// Interval of a collateral t2 set carrying the most t2 probability.
inline std::optional<Interval> principal_part(const IntervalSet& set, const Scenario& s) {
    std::optional<Interval> best;
    double best_mass = -1.0;
    for (const auto& iv : set) {
        const double mass = probability_between(iv.lo, iv.hi, s.market.p0, s.timeline.tau_a, s.market);
        if (mass > best_mass) {
            best_mass = mass;
            best = iv;
        }
    }
    return best;
}

/// Part of an agreed-rate set containing `p`, else the widest part.
inline std::optional<Interval> part_around(const IntervalSet& set, double p) {
    std::optional<Interval> widest;
    for (const auto& iv : set) {
        if (iv.contains(p)) return iv;
        if (!widest || iv.width() > widest->width()) widest = iv;
    }
    return widest;
}

struct Report {
    std::vector<std::pair<std::string, std::string>> lines;
    void add(const std::string& k, const std::string& v) { lines.emplace_back(k, v); }
    void add(const std::string& k, double v) { add(k, format_number(v)); }
    void write(std::ostream& os) const {
        for (const auto& [k, v] : lines) os << k << ": " << v << "\n";
    }
};

}  // namespace detail

struct SolveResult {
    detail::Report report;
    bool initiated = false;
};

inline SolveResult solve(const ScenarioFile& f, Variant v, const SolverConfig& cfg = {}) {
    const Scenario& s = f.scenario;
    SolveResult r;
    auto& rep = r.report;
    rep.add("variant", to_string(v));
    rep.add("p_star", s.p_star);
    switch (v) {
        case Variant::baseline: {
            const BaselinePolicy pol = solve_baseline(s, cfg);
            const StageUtilities u = htlc::detail::utilities_t1_given(s.market.p0, s, pol.p2_range, cfg);
            rep.add("threshold_t3", pol.p3_lower);
            rep.add("p2_set", format_range(pol.p2_range));
            rep.add("pstar_set", format_range(pol.pstar_range));
            rep.add("alice_advantage_t1", u.alice_cont - u.alice_stop);
            rep.add("bob_advantage_t1", u.bob_cont - u.bob_stop);
            r.initiated = pol.initiated;
            if (r.initiated) rep.add("sr", success_rate(s.p_star, s, cfg, Feasibility::assume));
            break;
        }
        case Variant::collateral: {
            const CollateralScenario cs = f.collateral();
            const CollateralPolicy pol = make_collateral_policy(cs, cfg);
            const auto sets = feasible_set_pstar_collateral(cs, s.market.p0, cfg);
            const StageUtilities u = htlc::detail::utilities_t1_collateral_given(s.market.p0, cs, pol.p2_set, cfg);
            rep.add("q", cs.q);
            rep.add("threshold_t3", pol.p3_lower);
            rep.add("p2_set", format_set(pol.p2_set));
            rep.add("pstar_set", format_set(sets.both));
            rep.add("pstar_set_alice", format_set(sets.alice));
            rep.add("pstar_set_bob", format_set(sets.bob));
            rep.add("alice_advantage_t1", u.alice_cont - u.alice_stop);
            rep.add("bob_advantage_t1", u.bob_cont - u.bob_stop);
            r.initiated = pol.initiated;
            if (r.initiated) rep.add("sr", success_rate_collateral(s.p_star, cs, cfg, Feasibility::assume));
            break;
        }
        case Variant::flexible: {
            const FlexiblePolicy pol(s, cfg);
            const double excess = alice_excess_utility_t1_flexible(pol, cfg);
            const FlexibleEntry entry = flexible_entry_range(s, cfg);
            const double fwd = expected_price(s.market.p0, s.timeline.tau_a, s.market);
            rep.add("threshold_t3_unit_lock", threshold_t3(s));
            rep.add("lock_amount_at_forward", pol.lock_amount(fwd));
            rep.add("alice_excess_t1", excess);
            rep.add("pstar_lower", entry.lower ? format_number(*entry.lower) : "none");
            rep.add("pstar_best", entry.best ? format_number(*entry.best) : "none");
            r.initiated = excess > 0.0;
            if (r.initiated) rep.add("sr", success_rate_flexible(pol, cfg));
            break;
        }
    }
    rep.add("initiated", r.initiated ? "yes" : "no");
    return r;
}

inline const char* kCsvHeader = "swept_value,feasible,sr,threshold_t3,p2_lo,p2_hi,pstar_lo,pstar_hi";

struct SweepRow {
    double value = 0.0;
    bool feasible = false;
    std::optional<double> sr, threshold, p2_lo, p2_hi, pstar_lo, pstar_hi;
    std::string error;
};

namespace detail {

inline std::string csv_field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

/// Scenario fields other than P*, for sharing agreed-rate scans across a
/// P* sweep.
inline auto rate_free_key(const ScenarioFile& f) {
    const Scenario& s = f.scenario;
    return std::make_tuple(s.market.mu, s.market.sigma, s.market.p0, s.alice.alpha, s.alice.r, s.bob.alpha, s.bob.r,
                           s.timeline.tau_a, s.timeline.tau_b, s.timeline.eps_b, f.q);
}

}  // namespace detail

inline std::vector<SweepRow> sweep(const ScenarioFile& base, const SweepSpec& spec, Variant v,
                                   const SolverConfig& cfg = {}) {
    std::vector<ScenarioFile> points;
    for (double x : spec.values) {
        ScenarioFile f = base;
        detail::parameter_table().at(spec.path)(f, x);
        try {
            detail::validate(f);
        } catch (const DomainError& e) {
            throw InputError("--sweep " + spec.path + "=" + format_number(x) + ": " + e.what());
        }
        points.push_back(f);
    }

    // Agreed-rate ranges depend on everything but P*; solve each once.
    using Key = decltype(detail::rate_free_key(base));
    std::map<Key, std::size_t> key_index;
    std::vector<std::size_t> rep_of;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto [it, fresh] = key_index.emplace(detail::rate_free_key(points[i]), key_index.size());
        if (fresh) rep_of.push_back(i);
    }
    std::vector<std::optional<Interval>> rate_part(rep_of.size());
    std::vector<IntervalSet> rate_set(rep_of.size());
    std::vector<std::optional<double>> flex_lower(rep_of.size());
    std::vector<std::string> rate_error(rep_of.size());
    detail::parallel_for(rep_of.size(), [&](std::size_t k) {
        const ScenarioFile& f = points[rep_of[k]];
        try {
            switch (v) {
                case Variant::baseline: {
                    const auto range = feasible_range_pstar(f.scenario, f.scenario.market.p0, cfg);
                    if (range) rate_set[k] = IntervalSet({*range});
                    break;
                }
                case Variant::collateral:
                    rate_set[k] = feasible_set_pstar_collateral(f.collateral(), f.scenario.market.p0, cfg).both;
                    break;
                case Variant::flexible:
                    flex_lower[k] = flexible_entry_range(f.scenario, cfg).lower;
                    break;
            }
        } catch (const NumericalError& e) {
            rate_error[k] = e.what();
        }
    });

    std::vector<SweepRow> rows(points.size());
    detail::parallel_for(points.size(), [&](std::size_t i) {
        const ScenarioFile& f = points[i];
        const Scenario& s = f.scenario;
        const std::size_t k = key_index.at(detail::rate_free_key(f));
        SweepRow& row = rows[i];
        row.value = spec.values[i];
        row.error = rate_error[k];
        try {
            switch (v) {
                case Variant::baseline: {
                    const BaselinePolicy pol = make_baseline_policy(s, cfg);
                    row.feasible = pol.initiated;
                    row.threshold = pol.p3_lower;
                    if (pol.p2_range) {
                        row.p2_lo = pol.p2_range->lo;
                        row.p2_hi = pol.p2_range->hi;
                    }
                    row.sr = success_rate(s.p_star, s, cfg, Feasibility::assume);
                    break;
                }
                case Variant::collateral: {
                    const CollateralPolicy pol = make_collateral_policy(f.collateral(), cfg);
                    row.feasible = pol.initiated;
                    row.threshold = pol.p3_lower;
                    if (const auto part = detail::principal_part(pol.p2_set, s)) {
                        row.p2_lo = part->lo;
                        row.p2_hi = part->hi;
                    }
                    row.sr = success_rate_collateral(s.p_star, f.collateral(), cfg, Feasibility::assume);
                    break;
                }
                case Variant::flexible: {
                    const FlexiblePolicy pol(s, cfg);
                    row.feasible = alice_excess_utility_t1_flexible(pol, cfg) > 0.0;
                    row.threshold = threshold_t3(s);
                    row.sr = success_rate_flexible(pol, cfg);
                    row.pstar_lo = flex_lower[k];
                    break;
                }
            }
            if (v != Variant::flexible) {
                if (const auto part = detail::part_around(rate_set[k], s.p_star)) {
                    row.pstar_lo = part->lo;
                    row.pstar_hi = part->hi;
                }
            }
        } catch (const NumericalError& e) {
            row.error = e.what();
        }
    });
    return rows;
}

inline void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << kCsvHeader << "\n";
    for (const auto& r : rows) {
        os << format_number(r.value) << "," << (r.feasible ? 1 : 0) << "," << detail::csv_field(r.sr) << ","
           << detail::csv_field(r.threshold) << "," << detail::csv_field(r.p2_lo) << "," << detail::csv_field(r.p2_hi)
           << "," << detail::csv_field(r.pstar_lo) << "," << detail::csv_field(r.pstar_hi) << "\n";
    }
}

struct SimulateResult {
    detail::Report report;
    bool initiated = false;
    double z = 0.0;
};

inline SimulateResult simulate(const ScenarioFile& f, Variant v, const SimConfig& sim, const SolverConfig& cfg = {}) {
    const Scenario& s = f.scenario;
    SimulateResult r;
    auto& rep = r.report;
    rep.add("variant", to_string(v));
    rep.add("p_star", s.p_star);
    rep.add("n", std::to_string(sim.n_replications));
    rep.add("seed", std::to_string(sim.seed));
    double quad = 0.0;
    SimEstimate mc;
    switch (v) {
        case Variant::baseline: {
            const BaselinePolicy pol = make_baseline_policy(s, cfg);
            r.initiated = pol.initiated;
            if (!r.initiated) return r;
            quad = success_rate(s.p_star, s, cfg, Feasibility::assume);
            mc = estimate_success_rate(pol, sim);
            break;
        }
        case Variant::collateral: {
            const CollateralPolicy pol = make_collateral_policy(f.collateral(), cfg);
            r.initiated = pol.initiated;
            if (!r.initiated) return r;
            quad = success_rate_collateral(s.p_star, f.collateral(), cfg, Feasibility::assume);
            mc = estimate_success_rate(pol, sim);
            break;
        }
        case Variant::flexible: {
            const FlexiblePolicy pol(s, cfg);
            r.initiated = alice_excess_utility_t1_flexible(pol, cfg) > 0.0;
            if (!r.initiated) return r;
            quad = success_rate_flexible(pol, cfg);
            mc = estimate_success_rate(pol, sim);
            break;
        }
    }
    r.z = mc.z_score(quad);
    rep.add("sr_quadrature", quad);
    rep.add("sr_monte_carlo", mc.mean);
    rep.add("std_error", mc.std_error);
    rep.add("z", r.z);
    return r;
}

namespace detail {

inline Variant parse_variant(const std::string& name) {
    if (name == "baseline") return Variant::baseline;
    if (name == "collateral") return Variant::collateral;
    if (name == "flexible") return Variant::flexible;
    throw InputError("--variant: expected baseline, collateral or flexible, got '" + name + "'");
}

/// Explicit --variant wins; otherwise a collateral block or a collateral
/// sweep selects the collateral game.
inline Variant resolve_variant(const std::string& flag, const ScenarioFile& f, const SweepSpec* sw) {
    const bool wants_collateral = f.has_collateral || (sw && sw->path == "collateral.q");
    if (flag.empty()) return wants_collateral ? Variant::collateral : Variant::baseline;
    const Variant v = parse_variant(flag);
    if (v != Variant::collateral && sw && sw->path == "collateral.q")
        throw InputError("--sweep collateral.q requires --variant collateral");
    if (v == Variant::flexible && f.q > 0.0) throw InputError("the flexible variant takes no collateral");
    return v;
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"HTLC atomic swap game solver and simulator"};
    app.require_subcommand(1);
    std::string scenario_path, variant_flag, out_path, sweep_arg;
    std::optional<std::size_t> n_flag;
    std::optional<std::uint64_t> seed_flag;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario_path, "scenario JSON file (default: built-in parameter table)");
        sub->add_option("--variant", variant_flag, "baseline | collateral | flexible");
        sub->add_option("--out", out_path, "output file (default: stdout)");
    };
    auto* solve_cmd = app.add_subcommand("solve", "thresholds, feasible sets and SR at the scenario's P*");
    common(solve_cmd);
    auto* sweep_cmd = app.add_subcommand("sweep", "CSV of SR and feasible sets over a parameter grid");
    common(sweep_cmd);
    sweep_cmd->add_option("--sweep", sweep_arg, "path=start:stop:count or path=v1,v2,...")->required();
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo check of the quadrature SR");
    common(sim_cmd);
    sim_cmd->add_option("--n", n_flag, "replications");
    sim_cmd->add_option("--seed", seed_flag, "64-bit seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return bad_input;
    }

    std::ofstream file;
    auto sink = [&]() -> std::ostream& {
        if (out_path.empty()) return out;
        file.open(out_path);
        if (!file) throw InputError(out_path + ": cannot open for writing");
        return file;
    };

    try {
        const ScenarioFile f = scenario_path.empty() ? ScenarioFile{} : load_scenario(scenario_path);
        if (solve_cmd->parsed()) {
            const Variant v = detail::resolve_variant(variant_flag, f, nullptr);
            const SolveResult r = solve(f, v);
            r.report.write(sink());
            if (!r.initiated) {
                err << "not initiated: P* = " << format_number(f.scenario.p_star)
                    << " is outside the feasible agreed-rate set\n";
                return not_initiated;
            }
            return ok;
        }
        if (sweep_cmd->parsed()) {
            const SweepSpec spec = parse_sweep(sweep_arg);
            const Variant v = detail::resolve_variant(variant_flag, f, &spec);
            const auto rows = sweep(f, spec, v);
            write_csv(sink(), rows);
            for (const auto& row : rows)
                if (!row.error.empty())
                    err << "warning: " << spec.path << "=" << format_number(row.value) << ": " << row.error << "\n";
            return ok;
        }
        const Variant v = detail::resolve_variant(variant_flag, f, nullptr);
        SimConfig sim;
        sim.n_replications = n_flag.value_or(f.n.value_or(1'000'000));
        sim.seed = seed_flag.value_or(f.seed.value_or(42));
        sim.workers = std::max(1u, std::thread::hardware_concurrency());
        if (sim.n_replications < 1) throw InputError("--n must be >= 1");
        const SimulateResult r = simulate(f, v, sim);
        r.report.write(sink());
        if (!r.initiated) {
            err << "not initiated: P* = " << format_number(f.scenario.p_star)
                << " is outside the feasible agreed-rate set\n";
            return not_initiated;
        }
        if (std::abs(r.z) > 4.0) {
            err << "self-check failed: |z| = " << format_number(std::abs(r.z)) << " > 4\n";
            return self_check_failed;
        }
        return ok;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return bad_input;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return bad_input;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return bad_input;
    }
}

}  // namespace htlc::cli
