#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nls/grid.hpp"
#include "nls/hierarchy.hpp"
#include "nls/nonlinearity.hpp"
#include "nls/solvers.hpp"

namespace nls {

struct RunConfig {
    std::string command;  // solve | oracle | diagnostics | sweep
    int dimension = 0;
    double radius = 20.0;
    int grid_points = 400;
    std::vector<PowerTerm> terms;
    std::vector<int> node_targets{0};
    double tol_residual = 1e-8;
    double tol_mass = 1e-10;
    double tol_pohozaev = 0.0;  // 0: reported only; >0: enforced as |P| < tol*A
    int max_iter = 60;
    unsigned seed = 42;
    std::string output_dir = ".";
    double oracle_power = 0.0;  // default: single term's exponent
    int diag_levels = 8;
    int diag_basis = 24;
    long diag_samples = 1000;
    int diag_starts = 8;
    double lambda_scan_min = -1e4;
    double lambda_scan_max = -0.5;
    int lambda_scan_points = 41;
    std::vector<RunConfig> sweep;

    SolverOptions solver_options() const {
        SolverOptions o;
        o.max_iter = max_iter;
        o.tol_residual = tol_residual;
        o.tol_mass = tol_mass;
        o.lambda_scan_min = lambda_scan_min;
        o.lambda_scan_max = lambda_scan_max;
        o.lambda_scan_points = lambda_scan_points;
        o.seed = seed;
        return o;
    }
};

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& obj, const std::vector<std::string>& allowed,
                       const std::string& where, std::vector<std::string>& errs) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed) ok = ok || it.key() == k;
        if (!ok) errs.push_back("unknown key '" + it.key() + "' in " + where);
    }
}

inline RunConfig parse_config_json(const json& j, std::vector<std::string>& errs,
                                   const std::string& where);

}  // namespace detail

/// Parse and validate a JSON run configuration. All violations are aggregated
/// into a single error; unknown keys are rejected.
inline RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config syntax error: ") + e.what());
    }
    std::vector<std::string> errs;
    RunConfig cfg = detail::parse_config_json(j, errs, "config");
    if (!errs.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
    return cfg;
}

namespace detail {

inline RunConfig parse_config_json(const json& j, std::vector<std::string>& errs,
                                   const std::string& where) {
    RunConfig c;
    if (!j.is_object()) {
        errs.push_back(where + " must be an object");
        return c;
    }
    check_keys(j,
               {"command", "dimension", "radius", "grid_points", "terms",
                "node_targets", "tolerances", "max_iter", "seed", "output_dir",
                "oracle_power", "diagnostics", "lambda_scan", "sweep"},
               where, errs);
    auto need = [&](const char* k) { return j.contains(k); };
    try {
        if (need("command")) c.command = j.at("command").get<std::string>();
        if (need("dimension")) c.dimension = j.at("dimension").get<int>();
        if (need("radius")) c.radius = j.at("radius").get<double>();
        if (need("grid_points")) c.grid_points = j.at("grid_points").get<int>();
        if (need("max_iter")) c.max_iter = j.at("max_iter").get<int>();
        if (need("seed")) c.seed = j.at("seed").get<unsigned>();
        if (need("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (need("oracle_power")) c.oracle_power = j.at("oracle_power").get<double>();
        if (need("node_targets"))
            c.node_targets = j.at("node_targets").get<std::vector<int>>();
        if (need("terms")) {
            c.terms.clear();
            for (const auto& t : j.at("terms")) {
                if (!t.is_array() || t.size() != 2) {
                    errs.push_back("each entry of 'terms' must be [a, p]");
                    continue;
                }
                c.terms.push_back({t[0].get<double>(), t[1].get<double>()});
            }
        }
        if (need("tolerances")) {
            const json& t = j.at("tolerances");
            check_keys(t, {"residual", "mass", "pohozaev"}, where + ".tolerances", errs);
            if (t.contains("residual")) c.tol_residual = t.at("residual").get<double>();
            if (t.contains("mass")) c.tol_mass = t.at("mass").get<double>();
            if (t.contains("pohozaev")) c.tol_pohozaev = t.at("pohozaev").get<double>();
        }
        if (need("diagnostics")) {
            const json& d = j.at("diagnostics");
            check_keys(d, {"levels", "basis_size", "samples", "starts"},
                       where + ".diagnostics", errs);
            if (d.contains("levels")) c.diag_levels = d.at("levels").get<int>();
            if (d.contains("basis_size")) c.diag_basis = d.at("basis_size").get<int>();
            if (d.contains("samples")) c.diag_samples = d.at("samples").get<long>();
            if (d.contains("starts")) c.diag_starts = d.at("starts").get<int>();
        }
        if (need("lambda_scan")) {
            const json& s = j.at("lambda_scan");
            check_keys(s, {"min", "max", "points"}, where + ".lambda_scan", errs);
            if (s.contains("min")) c.lambda_scan_min = s.at("min").get<double>();
            if (s.contains("max")) c.lambda_scan_max = s.at("max").get<double>();
            if (s.contains("points")) c.lambda_scan_points = s.at("points").get<int>();
        }
        if (need("sweep")) {
            int i = 0;
            for (const auto& sub : j.at("sweep"))
                c.sweep.push_back(parse_config_json(
                    sub, errs, where + ".sweep[" + std::to_string(i++) + "]"));
        }
    } catch (const json::exception& e) {
        errs.push_back(where + ": " + e.what());
        return c;
    }

    // semantic validation, aggregated
    const bool is_sweep = c.command == "sweep";
    if (c.command != "solve" && c.command != "oracle" && c.command != "diagnostics" &&
        !is_sweep)
        errs.push_back(where + ": command must be solve|oracle|diagnostics|sweep, got '" +
                       c.command + "'");
    if (!is_sweep) {
        if (c.dimension < 2) errs.push_back(where + ": dimension must be >= 2");
        if (!(c.radius > 0.0)) errs.push_back(where + ": radius must be positive");
        if (c.grid_points < 16) errs.push_back(where + ": grid_points must be >= 16");
        if (c.command != "oracle" || !c.terms.empty()) {
            if (c.terms.empty() && c.command != "oracle") {
                errs.push_back(where + ": terms must be nonempty");
            } else if (!c.terms.empty() && c.dimension >= 2) {
                try {
                    validate_powers(c.dimension, c.terms);
                } catch (const std::exception& e) {
                    errs.push_back(where + ": " + e.what());
                }
            }
        }
        if (c.command == "oracle" && c.oracle_power == 0.0) {
            if (c.terms.size() == 1)
                c.oracle_power = c.terms[0].p;
            else
                errs.push_back(where + ": oracle needs oracle_power or a single term");
        }
        for (int n : c.node_targets)
            if (n < 0) errs.push_back(where + ": node targets must be >= 0");
        if (!(c.tol_residual > 0.0)) errs.push_back(where + ": residual tolerance must be positive");
        if (!(c.tol_mass > 0.0)) errs.push_back(where + ": mass tolerance must be positive");
        if (c.tol_pohozaev < 0.0) errs.push_back(where + ": pohozaev tolerance must be >= 0");
        if (c.max_iter < 1) errs.push_back(where + ": max_iter must be positive");
        if (!(c.lambda_scan_min < c.lambda_scan_max && c.lambda_scan_max < 0.0))
            errs.push_back(where + ": lambda scan range must satisfy min < max < 0");
        if (c.lambda_scan_points < 2) errs.push_back(where + ": lambda scan needs >= 2 points");
        if (c.diag_levels < 1 || c.diag_basis < c.diag_levels)
            errs.push_back(where + ": diagnostics needs 1 <= levels <= basis_size");
    } else if (c.sweep.empty()) {
        errs.push_back(where + ": sweep requires a nonempty 'sweep' array");
    }
    return c;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json record_to_json(const RunConfig& cfg, const SolutionRecord& rec) {
    json terms = json::array();
    for (const auto& t : cfg.terms) terms.push_back({t.a, t.p});
    json scan = json::array();
    for (const auto& [l, m] : rec.lambda_scan) scan.push_back({l, m});
    return json{{"N", cfg.dimension},
                {"R", cfg.radius},
                {"M", cfg.grid_points},
                {"terms", terms},
                {"lambda", rec.lambda},
                {"energy", rec.energy},
                {"nodes", rec.nodes},
                {"residual", rec.residual},
                {"pohozaev_residual", rec.pohozaev_residual},
                {"mass_error", rec.mass_error},
                {"solver", solver_name(rec.solver)},
                {"iterations", rec.iterations},
                {"seed", cfg.seed},
                {"lambda_scan", scan}};
}

}  // namespace detail

/// Write the profile of one record as solution_<index>.csv (r,u columns, 17
/// significant digits).
inline void write_solution(const std::filesystem::path& dir, const SolutionRecord& rec,
                           int index) {
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / ("solution_" + std::to_string(index) + ".csv"));
    if (!f) throw std::runtime_error("write_solution: cannot open output file");
    f << "r,u\n";
    const RadialGrid& g = *rec.field.grid;
    for (std::size_t j = 0; j < g.size(); ++j)
        f << detail::fmt17(g.nodes[j]) << ',' << detail::fmt17(rec.field[j]) << '\n';
    if (!f) throw std::runtime_error("write_solution: write failure");
}

/// Read back record <index> from a run directory; the caller supplies the grid
/// (validated against the summary metadata). Round trip is bit exact.
inline SolutionRecord read_solution(const std::filesystem::path& dir, int index,
                                    const RadialGrid& g) {
    using nlohmann::json;
    std::ifstream sf(dir / "summary.json");
    if (!sf) throw std::runtime_error("read_solution: missing summary.json");
    json summary = json::parse(sf);
    if (!summary.contains("records") || index >= static_cast<int>(summary["records"].size()))
        throw std::runtime_error("read_solution: record index out of range");
    const json& r = summary["records"][index];
    for (const char* k : {"N", "R", "M", "terms", "lambda", "energy", "nodes",
                          "residual", "pohozaev_residual", "mass_error", "solver",
                          "iterations", "seed"})
        if (!r.contains(k))
            throw std::runtime_error(std::string("read_solution: summary missing field '") +
                                     k + "'");
    if (r["N"].get<int>() != g.dimension || r["M"].get<int>() != g.count ||
        r["R"].get<double>() != g.radius)
        throw std::runtime_error("read_solution: grid does not match summary metadata");

    SolutionRecord rec;
    rec.lambda = r["lambda"].get<double>();
    rec.energy = r["energy"].get<double>();
    rec.nodes = r["nodes"].get<int>();
    rec.residual = r["residual"].get<double>();
    rec.pohozaev_residual = r["pohozaev_residual"].get<double>();
    rec.mass_error = r["mass_error"].get<double>();
    rec.iterations = r["iterations"].get<int>();
    std::string sv = r["solver"].get<std::string>();
    rec.solver = sv == "fiber_descent" ? SolverKind::fiber_descent
                : sv == "shooting"     ? SolverKind::shooting
                                       : SolverKind::newton;
    if (r.contains("lambda_scan"))
        for (const auto& row : r["lambda_scan"])
            rec.lambda_scan.emplace_back(row[0].get<double>(), row[1].get<double>());

    std::ifstream cf(dir / ("solution_" + std::to_string(index) + ".csv"));
    if (!cf) throw std::runtime_error("read_solution: missing profile csv");
    std::string header;
    std::getline(cf, header);
    if (header != "r,u") {
        std::string missing = header.find('r') == std::string::npos ? "r" : "u";
        throw std::runtime_error("read_solution: profile missing column '" + missing + "'");
    }
    rec.field = RadialField(g);
    std::string line;
    std::size_t j = 0;
    while (std::getline(cf, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("read_solution: profile missing column 'u'");
        if (j >= g.size()) throw std::runtime_error("read_solution: too many profile rows");
        rec.field[j++] = std::stod(line.substr(comma + 1));
    }
    if (j != g.size()) throw std::runtime_error("read_solution: truncated profile");
    return rec;
}

namespace detail {

inline int run_single(const RunConfig& cfg, bool quiet);

}  // namespace detail

/// Execute a run configuration; returns the process exit status (0 iff every
/// requested artifact converged and passed validation). Artifacts land in
/// cfg.output_dir; errors are also written there as error.json.
inline int run(const RunConfig& cfg, bool quiet = false) {
    namespace fs = std::filesystem;
    using nlohmann::json;
    if (cfg.command == "sweep") {
        fs::create_directories(cfg.output_dir);
        std::vector<std::future<int>> futs;
        for (std::size_t i = 0; i < cfg.sweep.size(); ++i) {
            RunConfig sub = cfg.sweep[i];
            sub.output_dir = (fs::path(cfg.output_dir) / ("run_" + std::to_string(i))).string();
            futs.push_back(std::async(std::launch::async, [sub, quiet] {
                return detail::run_single(sub, quiet);
            }));
        }
        json index = json::array();
        int status = 0;
        for (std::size_t i = 0; i < futs.size(); ++i) {
            int s = futs[i].get();
            status = status == 0 ? s : status;
            index.push_back({{"run", i},
                             {"dir", "run_" + std::to_string(i)},
                             {"status", s}});
        }
        std::ofstream f(fs::path(cfg.output_dir) / "sweep_index.json");
        f << json{{"runs", index}}.dump(2) << '\n';
        return status;
    }
    return detail::run_single(cfg, quiet);
}

namespace detail {

inline int run_single(const RunConfig& cfg, bool quiet) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    try {
        if (cfg.command == "diagnostics") {
            RadialGrid g = make_grid(cfg.dimension, cfg.radius, cfg.grid_points);
            PowerSumNonlinearity nl = validate_powers(cfg.dimension, cfg.terms);
            SubspaceHierarchy h = build_hierarchy(g, cfg.diag_basis);
            auto reports = run_diagnostics(g, nl, h, cfg.diag_levels, cfg.diag_samples,
                                           cfg.diag_starts, cfg.seed);
            json levels = json::array();
            for (const auto& r : reports) {
                levels.push_back({{"level", r.level},
                                  {"mu_alpha", r.mu_alpha},
                                  {"mu_beta", r.mu_beta},
                                  {"M_n", r.M_n},
                                  {"K", r.K},
                                  {"L", r.L},
                                  {"rho_n", r.rho_n},
                                  {"lemma2_bound", r.lemma2_bound},
                                  {"samples_checked", r.samples_checked},
                                  {"violations", r.violations},
                                  {"bn_attempts", r.bn_attempts},
                                  {"bn_hits", r.bn_hits},
                                  {"bn_violations", r.bn_violations},
                                  {"bn_min_energy", r.bn_min_energy}});
                if (!quiet)
                    std::fprintf(stdout, "level %d: rho_n=%.6g violations=%ld\n",
                                 r.level, r.rho_n, r.violations);
            }
            json out{{"N", cfg.dimension}, {"R", cfg.radius}, {"M", cfg.grid_points},
                     {"basis_size", cfg.diag_basis}, {"seed", cfg.seed},
                     {"levels", levels}};
            std::ofstream f(fs::path(cfg.output_dir) / "minmax_report.json");
            f << out.dump(2) << '\n';
            long viol = 0;
            for (const auto& r : reports) viol += r.violations + r.bn_violations;
            return viol == 0 ? 0 : 1;
        }

        RadialGrid g = make_grid(cfg.dimension, cfg.radius, cfg.grid_points);
        SolverOptions opts = cfg.solver_options();
        std::vector<SolutionRecord> records;
        if (cfg.command == "oracle") {
            records.push_back(oracle_homogeneous(cfg.dimension, cfg.oracle_power, g, opts));
        } else {  // solve
            PowerSumNonlinearity nl = validate_powers(cfg.dimension, cfg.terms);
            for (int n : cfg.node_targets)
                records.push_back(n == 0 ? ground_state(g, nl, opts)
                                         : excited_state(g, nl, n, opts));
        }

        json recs = json::array();
        RunConfig meta = cfg;
        if (cfg.command == "oracle" && meta.terms.empty())
            meta.terms.push_back({1.0, cfg.oracle_power});
        bool all_ok = true;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const SolutionRecord& r = records[i];
            write_solution(cfg.output_dir, r, static_cast<int>(i));
            recs.push_back(record_to_json(meta, r));
            bool ok = record_is_valid(r, opts);
            if (cfg.tol_pohozaev > 0.0) {
                EnergyBreakdown e = energy_J(g, validate_powers(cfg.dimension, meta.terms),
                                             r.field);
                ok = ok && r.pohozaev_residual < cfg.tol_pohozaev * e.kinetic;
            }
            all_ok = all_ok && ok;
            if (!quiet)
                std::fprintf(stdout,
                             "record %zu: lambda=%.10g J=%.10g nodes=%d residual=%.3g\n",
                             i, r.lambda, r.energy, r.nodes, r.residual);
        }
        std::ofstream f(fs::path(cfg.output_dir) / "summary.json");
        f << json{{"records", recs}}.dump(2) << '\n';
        return all_ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::ofstream f(fs::path(cfg.output_dir) / "error.json");
        f << nlohmann::json{{"error", e.what()}}.dump(2) << '\n';
        if (!quiet) std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace detail

}  // namespace nls
