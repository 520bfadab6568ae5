// Acceptance suite: one line of output per criterion, [PASS] or [FAIL].
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nls/hierarchy.hpp"
#include "nls/io.hpp"
#include "nls/solvers.hpp"

using namespace nls;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int index, const char* title, bool pass, const std::string& detail) {
    std::printf("[%s] %d. %s%s%s\n", pass ? "PASS" : "FAIL", index, title,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double now() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

RadialField random_field(const RadialGrid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    RadialField u(g);
    for (int j = 1; j < g.count; ++j) u[j] = gauss(rng) * std::exp(-0.5 * g.nodes[j]);
    u[0] = (4.0 * u[1] - u[2]) / 3.0;
    u[g.count] = 0.0;
    return u;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// --- criterion 1: homogeneous oracle equivalence at R=20, M=400 -------------

void criterion_1() {
    const char* title = "homogeneous oracle equivalence (N=3, p=4, R=20, M=400)";
    try {
        RadialGrid g = make_grid(3, 20.0, 400);
        PowerSumNonlinearity nl = validate_powers(3, {{1.0, 4.0}});
        SolverOptions opts;
        double t0 = now();
        SolutionRecord orc = oracle_homogeneous(3, 4.0, g, opts);
        double t1 = now();
        SolutionRecord grd = ground_state(g, nl, opts);
        double t2 = now();
        SolutionRecord exc = excited_state(g, nl, 0, opts);
        double t3 = now();

        double dg = std::abs(grd.lambda - orc.lambda) / std::abs(orc.lambda);
        double de = std::abs(exc.lambda - orc.lambda) / std::abs(orc.lambda);
        double pg = detail::l2_distance(g, grd.field, orc.field);
        double pe = detail::l2_distance(g, exc.field, orc.field);
        bool ok = dg < 1e-4 && de < 1e-4 && pg < 1e-3 && pe < 1e-3 &&
                  (t1 - t0) < 60.0 && (t2 - t1) < 60.0 && (t3 - t2) < 60.0;
        report(1, title, ok,
               "lambda rel diffs " + fmt("%.2e", dg) + "/" + fmt("%.2e", de) +
                   ", profile dists " + fmt("%.2e", pg) + "/" + fmt("%.2e", pe));
    } catch (const std::exception& e) {
        std::string w = e.what();
        report(1, title, false, "solver failure: " + w.substr(0, w.find('\n')));
    }
}

// --- criterion 2: record validation suite -----------------------------------

void criterion_2() {
    const char* title = "record validation (mass, residual, Pohozaev, lambda sign)";
    try {
        std::vector<std::pair<std::string, SolutionRecord>> records;
        std::vector<const RadialGrid*> grids;
        SolverOptions opts;

        static RadialGrid g_p4 = make_grid(3, 2.0, 40000);
        records.emplace_back("p4-oracle", oracle_homogeneous(3, 4.0, g_p4, opts));
        grids.push_back(&g_p4);

        static RadialGrid g_mix = make_grid(3, 3.5, 28000);
        PowerSumNonlinearity mix = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
        records.emplace_back("mix-ground", ground_state(g_mix, mix, opts));
        grids.push_back(&g_mix);
        records.emplace_back("mix-shoot0", excited_state(g_mix, mix, 0, opts));
        grids.push_back(&g_mix);

        bool ok = true;
        std::string detail_msg;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const SolutionRecord& r = records[i].second;
            const RadialGrid& g = *grids[i];
            PowerSumNonlinearity nl = i == 0
                ? validate_powers(3, {{1.0, 4.0}})
                : mix;
            double A = grad_l2_sq(g, r.field);
            bool rec_ok = r.mass_error < 1e-10 &&
                          r.residual < 1e-8 * (1.0 + std::abs(r.lambda)) &&
                          r.pohozaev_residual < 1e-6 * A && r.lambda < 0.0;
            ok = ok && rec_ok;
            detail_msg += records[i].first + " |P|/A=" +
                          fmt("%.2e", r.pohozaev_residual / A) + " ";
            (void)nl;
        }
        report(2, title, ok, detail_msg);
    } catch (const std::exception& e) {
        std::string w = e.what();
        report(2, title, false, "solver failure: " + w.substr(0, w.find('\n')));
    }
}

// --- criterion 3: desk-scale multiplicity -----------------------------------

void criterion_3() {
    const char* title = "multiplicity: five distinct records, increasing energy";
    try {
        double t0 = now();
        RadialGrid g = make_grid(3, 3.5, 28000);
        PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
        SolverOptions opts;
        opts.lambda_scan_min = -1e5;
        opts.lambda_scan_points = 49;

        std::vector<SolutionRecord> recs;
        for (int n = 0; n <= 4; ++n)
            recs.push_back(n == 0 ? ground_state(g, nl, opts)
                                  : excited_state(g, nl, n, opts));
        double elapsed = now() - t0;

        bool ok = elapsed < 600.0;
        std::string msg = "J = ";
        for (int n = 0; n <= 4; ++n) {
            ok = ok && recs[n].nodes == n && recs[n].lambda < 0.0 &&
                 recs[n].mass_error < 1e-10;
            if (n > 0) ok = ok && recs[n].energy > recs[n - 1].energy;
            msg += fmt("%.4g", recs[n].energy) + (n < 4 ? ", " : "");
        }
        for (std::size_t i = 0; i < recs.size(); ++i)
            for (std::size_t j = i + 1; j < recs.size(); ++j)
                ok = ok && detail::l2_distance(g, recs[i].field, recs[j].field) > 1e-2;
        // the -u partners validate identically
        for (const auto& r : recs) {
            RadialField neg(g);
            for (std::size_t j = 0; j < g.size(); ++j) neg[j] = -r.field[j];
            EnergyBreakdown e = energy_J(g, nl, neg);
            ok = ok && std::abs(e.energy - r.energy) < 1e-9 * (1.0 + std::abs(r.energy)) &&
                 node_count(neg) == r.nodes;
        }
        report(3, title, ok, msg + fmt(" (%.0f s)", elapsed));
    } catch (const std::exception& e) {
        std::string w = e.what();
        report(3, title, false, "solver failure: " + w.substr(0, w.find('\n')));
    }
}

// --- criterion 4: gradient correctness --------------------------------------

void criterion_4() {
    const char* title = "gradient matches central differences (20 random pairs)";
    RadialGrid g = make_grid(3, 6.0, 300);
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        RadialField u = random_field(g, rng), v = random_field(g, rng);
        RadialField grad = gradient_J(g, nl, u);
        double lhs = l2_inner(g, grad, v);
        double hstep = 1e-5;
        RadialField up(g), um(g);
        for (std::size_t j = 0; j < g.size(); ++j) {
            up[j] = u[j] + hstep * v[j];
            um[j] = u[j] - hstep * v[j];
        }
        double rhs =
            (energy_J(g, nl, up).energy - energy_J(g, nl, um).energy) / (2.0 * hstep);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1e-30, std::abs(rhs)));
    }
    report(4, title, worst < 1e-6, "worst relative error " + fmt("%.2e", worst));
}

// --- criterion 5: stretched-functional identities ---------------------------

void criterion_5() {
    const char* title = "stretched-functional identities and fiber uniqueness";
    RadialGrid g = make_grid(3, 12.0, 2400);
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
    std::mt19937_64 rng(77);
    bool ok = true;
    std::string why;

    for (int trial = 0; trial < 100; ++trial) {
        RadialField u = random_field(g, rng);
        EnergyBreakdown e = energy_J(g, nl, u);
        double P = pohozaev(g, nl, u);
        double ds0 = stretched_J_ds(e.kinetic, e.moments, nl, 0.0);
        if (std::abs(P - ds0) > 1e-10 * std::max(1.0, std::abs(P))) {
            ok = false;
            why = "P vs dJ/ds mismatch";
        }
    }

    RadialField u(g);
    for (std::size_t j = 0; j < g.size(); ++j)
        u[j] = std::exp(-g.nodes[j] * g.nodes[j] / 2.0);
    u[g.count] = 0.0;
    detail::normalize_mass(g, u);
    EnergyBreakdown e = energy_J(g, nl, u);
    for (double s : {-0.5, -0.25, 0.25, 0.5}) {
        double closed = stretched_J(e.kinetic, e.moments, nl, s);
        double grid_val = energy_J(g, nl, dilate(g, u, s)).energy;
        if (std::abs(grid_val - closed) > 1e-3 * std::abs(closed)) {
            ok = false;
            why = "closed form vs grid dilation at s=" + fmt("%.2f", s);
        }
    }

    for (int trial = 0; trial < 20; ++trial) {
        RadialField w = random_field(g, rng);
        EnergyBreakdown ew = energy_J(g, nl, w);
        int sign_changes = 0;
        double prev = stretched_J_ds(ew.kinetic, ew.moments, nl, -20.0);
        for (int i = 1; i < 10000; ++i) {
            double s = -20.0 + 40.0 * i / 9999.0;
            double cur = stretched_J_ds(ew.kinetic, ew.moments, nl, s);
            if (prev * cur < 0.0) ++sign_changes;
            prev = cur;
        }
        if (sign_changes != 1) {
            ok = false;
            why = "fiber derivative sign changes = " + std::to_string(sign_changes);
        }
    }
    report(5, title, ok, why);
}

// --- criteria 6 and 7: hierarchy growth and the lower-bound chain -----------

void criteria_6_7() {
    RadialGrid g = make_grid(3, 3.5, 400);
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
    SubspaceHierarchy h = build_hierarchy(g, 24);

    bool ok6 = true;
    std::string msg6;
    for (double p : {3.6, 4.4}) {
        std::vector<double> mu(9, 0.0);
        for (int n = 8; n >= 1; --n) {
            mu[n] = mu_n(g, h, p, n, 8, 42);
            if (n < 8) mu[n] = std::min(mu[n], mu[n + 1]);  // inf over larger set
        }
        for (int n = 2; n <= 8; ++n) ok6 = ok6 && mu[n] >= mu[n - 1] * (1.0 - 1e-12);
        ok6 = ok6 && mu[8] > 2.0 * mu[1];
        msg6 += "p=" + fmt("%.1f", p) + " ratio " + fmt("%.2f", mu[8] / mu[1]) + " ";
    }
    report(6, "mu_n growth witness (nondecreasing, mu_8 > 2 mu_1)", ok6, msg6);

    bool ok7 = true;
    long total_viol = 0, total_bn_viol = 0;
    int total_hits = 0;
    auto reports = run_diagnostics(g, nl, h, 8, 1000, 8, 42);
    for (const auto& r : reports) {
        total_viol += r.violations;
        total_bn_viol += r.bn_violations;
        total_hits += r.bn_hits;
    }
    ok7 = total_viol == 0 && total_bn_viol == 0 && total_hits > 0;
    report(7, "lower-bound chain: 0 violations over 8x1000 samples + B_n bound", ok7,
           "violations=" + std::to_string(total_viol) +
               " bn_violations=" + std::to_string(total_bn_viol) +
               " bn_hits=" + std::to_string(total_hits));
}

// --- criterion 8: discretization convergence --------------------------------

void criterion_8() {
    const char* title = "second-order Richardson behavior of lambda(M)";
    try {
        PowerSumNonlinearity nl = validate_powers(3, {{1.0, 4.0}});
        SolverOptions opts;
        double lam[3];
        int k = 0;
        for (int M : {200, 400, 800})
            lam[k++] = ground_state(make_grid(3, 2.0, M), nl, opts).lambda;
        double ratio = (lam[0] - lam[1]) / (lam[1] - lam[2]);
        report(8, title, ratio > 3.5 && ratio < 4.5, "ratio " + fmt("%.3f", ratio));
    } catch (const std::exception& e) {
        std::string w = e.what();
        report(8, title, false, "solver failure: " + w.substr(0, w.find('\n')));
    }
}

// --- criterion 9: determinism and round-trip --------------------------------

void criterion_9() {
    const char* title = "determinism and bitwise round-trip";
    try {
        fs::path base = fs::temp_directory_path() / "nls_acceptance_det";
        fs::remove_all(base);
        const char* text = R"({
            "command": "solve", "dimension": 3, "radius": 2.0, "grid_points": 400,
            "terms": [[1.0, 4.0]], "node_targets": [0], "seed": 42
        })";
        RunConfig c1 = parse_config(text), c2 = parse_config(text);
        c1.output_dir = (base / "a").string();
        c2.output_dir = (base / "b").string();
        bool ok = run(c1, true) == 0 && run(c2, true) == 0;

        auto slurp = [](const fs::path& p) {
            std::ifstream f(p);
            std::stringstream ss;
            ss << f.rdbuf();
            return ss.str();
        };
        ok = ok && slurp(c1.output_dir + "/summary.json") ==
                       slurp(c2.output_dir + "/summary.json");
        ok = ok && slurp(c1.output_dir + "/solution_0.csv") ==
                       slurp(c2.output_dir + "/solution_0.csv");

        RadialGrid g = make_grid(3, 2.0, 400);
        SolutionRecord w1 = read_solution(c1.output_dir, 0, g);
        SolutionRecord w2 = read_solution(c2.output_dir, 0, g);
        bool bitwise = w1.lambda == w2.lambda && w1.energy == w2.energy;
        for (std::size_t j = 0; j < g.size(); ++j)
            bitwise = bitwise && w1.field[j] == w2.field[j];
        ok = ok && bitwise;
        fs::remove_all(base);
        report(9, title, ok, "");
    } catch (const std::exception& e) {
        std::string w = e.what();
        report(9, title, false, std::string("failure: ") + w.substr(0, w.find('\n')));
    }
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criteria_6_7();
    criterion_8();
    criterion_9();
    std::printf("%d of 9 criteria failed\n", failures);
    return failures;
}
