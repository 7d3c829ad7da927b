// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include "../unit/helpers.hpp"

#include "fairmatch/attenuation.hpp"
#include "fairmatch/benchmark_lp.hpp"
#include "fairmatch/bounds.hpp"
#include "fairmatch/harness.hpp"
#include "fairmatch/ingest.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>

using namespace fairmatch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

struct CommandResult {
    int status = -1;
    std::string output;
};

CommandResult run_command(const std::string& cmd) {
    CommandResult r;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
    r.status = pclose(pipe);
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

double set_objective(double tau) {
    double s = 0.0;
    for (double x : minimizer_set(tau)) s += std::log1p(x * std::expm1(tau));
    return s;
}

// min_i z_i / x_i* over agents with x_i* >= floor
double min_ratio(const TrialReport& r, const LpSolution& lp, double floor, int* argmin = nullptr) {
    double best = 1e300;
    for (std::size_t i = 0; i < r.z.size(); ++i) {
        const double x = lp.agent_mass[i];
        if (x < floor) continue;
        const double v = r.z[i] / x;
        if (v < best) {
            best = v;
            if (argmin) *argmin = static_cast<int>(i);
        }
    }
    return best;
}

Outcome criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    const CommandResult r = run_command(quote(FAIRMATCH_CLI) + " bound sampb --tau 1.0");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto eq = r.output.find("= ");
    if (r.status != 0 || eq == std::string::npos) return {false, "CLI failed: " + r.output};
    const double v = std::stod(r.output.substr(eq + 2));
    return {std::abs(v - 0.725) <= 0.001 && secs < 1.0, "sampb(1) = " + fmt(v, 6) + ", CLI time " + fmt(secs, 3) + " s"};
}

Outcome criterion2() {
    const BoundEvaluation e = minimize_sampab_ratio();
    const bool ok = std::abs(e.value - 0.719) <= 0.002 && std::abs(e.x - (1.0 - std::exp(-1.0))) <= 0.01 &&
                    std::abs(e.kappa - 1.0) <= 0.01;
    return {ok, "min F/x = " + fmt(e.value, 6) + " at x = " + fmt(e.x, 6) + ", kappa = " + fmt(e.kappa, 9) + " (" +
                    std::to_string(e.evaluations) + " evaluations)"};
}

Outcome criterion3() {
    Rng rng(3);
    double worst = 0.0;
    double worst_tau = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double tau = static_cast<double>(1 + rng.index(1000)) / 1000.0;
        const double gap = std::abs(allocation_minimum(tau, 1e-3) - set_objective(tau));
        if (gap > worst) {
            worst = gap;
            worst_tau = tau;
        }
    }
    return {worst <= 5e-3, "max |DP - S(tau)| = " + fmt(worst, 6) + " at tau = " + fmt(worst_tau, 3)};
}

struct Criterion4Tally {
    int violations = 0;
    double worst_gap = 0.0;
};

Criterion4Tally lp_vs_oracle(SubsetCap cap) {
    Criterion4Tally tally;
    LpOptions opts;
    opts.cap = cap;
    Rng rng(4);
    for (int k = 0; k < 200; ++k) {
        const int n_i = 1 + static_cast<int>(rng.index(4));
        const int T = 1 + static_cast<int>(rng.index(4));
        const Instance inst = testing::random_tiny(n_i, T, rng.next());
        for (Objective obj : {Objective::ifm, Objective::gfm, Objective::vom}) {
            const double gap = clairvoyant_oracle(inst, obj) - solve_lp(inst, obj, opts).value;
            if (gap > 1e-6) ++tally.violations;
            tally.worst_gap = std::max(tally.worst_gap, gap);
        }
    }
    return tally;
}

Outcome criterion4() {
    const Criterion4Tally finite = lp_vs_oracle(SubsetCap::finite_horizon);
    const Criterion4Tally asym = lp_vs_oracle(SubsetCap::asymptotic);
    std::cout << "       info: with the asymptotic cap 1-e^{-s}, " << asym.violations
              << " of 600 (instance, objective) pairs have OPT > LP* (largest gap " << fmt(asym.worst_gap, 6) << ")\n";
    return {finite.violations == 0, "finite-horizon cap: " + std::to_string(finite.violations) +
                                        " violations over 600 pairs, largest OPT - LP* = " + fmt(finite.worst_gap, 9)};
}

Outcome criterion5() {
    const Instance inst = make_example1(50);
    const LpSolution lp = example1_reference_solution(inst);
    PlanOptions po;
    po.sim_count = 100;
    po.seed = 55;
    const AttenuationTable table = plan(inst, lp, po);
    PolicyContext ctx{&inst, &lp, &table, Objective::vom};
    RunOptions ro;
    ro.trials = 10000;
    ro.master_seed = 5;
    ro.threads = threads();
    const TrialReport b = run_policy("samp-b", ctx, lp.value, ro);
    const TrialReport ab = run_policy("samp-ab", ctx, lp.value, ro);
    const double limit = 1.0 - std::exp(-1.0) + 0.08;
    return {b.z[0] <= limit && ab.z[0] >= 0.70,
            "SAMP-B Z_i* = " + fmt(b.z[0]) + " (<= " + fmt(limit) + "), SAMP-AB Z_i* = " + fmt(ab.z[0]) + " (>= 0.70)"};
}

Outcome criterion6() {
    const Instance inst = make_example_worst(100);
    const LpSolution lp = normalize_ifm(solve_lp(inst, Objective::ifm), inst);
    PolicyContext ctx{&inst, &lp, nullptr, Objective::ifm};
    RunOptions ro;
    ro.trials = 10000;
    ro.master_seed = 6;
    ro.threads = threads();
    const double tau = 1.0 - std::exp(-1.0);
    const TrialReport g = run_policy("greedy", ctx, lp.value, ro);
    const TrialReport r = run_policy("ranking", ctx, lp.value, ro);
    const TrialReport s = run_policy("samp-b", ctx, lp.value, ro);
    const double sb = *std::min_element(s.z.begin(), s.z.end()) / tau;
    return {g.z[0] <= 0.2 && r.z[0] <= 0.2 && sb >= 0.70,
            "GREEDY Z_1 = " + fmt(g.z[0]) + ", RANKING Z_1 = " + fmt(r.z[0]) + ", SAMP-B min Z/tau* = " + fmt(sb) +
                " (LP tau = " + fmt(lp.value, 6) + ")"};
}

Outcome criterion7() {
    bool ok = true;
    std::string detail;
    for (int T : {50, 100}) {
        double sum = 0.0, lowest = 1e300;
        for (int k = 0; k < 20; ++k) {
            const Instance inst = generate_synthetic(100, T, 3, WeightMode::unit, GroupMode::singletons(),
                                                     derive_seed(7, {static_cast<std::uint64_t>(T), static_cast<std::uint64_t>(k)}));
            ExperimentConfig cfg;
            cfg.policies = {"samp-b"};
            cfg.run.trials = 5000;
            cfg.run.master_seed = derive_seed(70, {static_cast<std::uint64_t>(T), static_cast<std::uint64_t>(k)});
            cfg.run.threads = threads();
            const ExperimentResult res = run_experiment(inst, cfg);
            const double cr1 = res.reports[0].cr1.value_or(0.0);
            sum += cr1;
            lowest = std::min(lowest, cr1);
        }
        const double mean = sum / 20;
        ok = ok && mean >= 0.70;
        detail += "T=" + std::to_string(T) + ": mean CR1 " + fmt(mean) + " (min " + fmt(lowest) + ")  ";
    }
    return {ok, detail};
}

Outcome criterion8() {
    bool ok = true;
    std::string detail;
    struct Cell {
        const char* name;
        Objective objective;
        WeightMode weights;
        GroupMode groups;
    };
    const Cell cells[] = {{"GFM", Objective::gfm, WeightMode::unit, GroupMode::partition(10)},
                          {"VOM", Objective::vom, WeightMode::uniform, GroupMode::singletons()}};
    for (const Cell& c : cells) {
        double worst = 1e300, worst_sim100 = 1e300;
        for (std::uint64_t k = 0; k < 3; ++k) {
            const Instance inst = generate_synthetic(100, 100, 3, c.weights, c.groups, derive_seed(8, {k}));
            const LpSolution lp = solve_lp(inst, c.objective);
            RunOptions ro;
            ro.trials = 20000;
            ro.master_seed = derive_seed(80, {k});
            ro.threads = threads();
            for (int sims : {5000, 100}) {
                PlanOptions po;
                po.sim_count = sims;
                po.seed = derive_seed(800, {k});
                const AttenuationTable table = plan(inst, lp, po);
                PolicyContext ctx{&inst, &lp, &table, c.objective};
                const TrialReport r = run_policy("samp-ab", ctx, lp.value, ro);
                const double m = min_ratio(r, lp, 0.1);
                (sims == 100 ? worst_sim100 : worst) = std::min(sims == 100 ? worst_sim100 : worst, m);
            }
        }
        ok = ok && worst >= 0.70;
        detail += std::string(c.name) + ": min Z/x* " + fmt(worst) + " (sim_count 100: " + fmt(worst_sim100) + ")  ";
    }
    return {ok, detail + "[sim_count 5000, 20000 trials, 3 instances per cell]"};
}

Outcome criterion9() {
    Rng rng(9);
    int mismatches = 0, violated = 0;
    for (int k = 0; k < 500; ++k) {
        const int d = 1 + static_cast<int>(rng.index(8));
        std::vector<Edge> edges;
        for (int j = 0; j < d; ++j) edges.push_back({0, j});
        const Instance inst({1.0}, std::vector<double>(static_cast<std::size_t>(d), 1.0), edges, {{0}}, d);
        std::vector<double> x(static_cast<std::size_t>(d));
        const double scale = 0.3 + 1.2 * rng.uniform();
        for (double& v : x) v = rng.uniform() * scale / std::sqrt(static_cast<double>(d));
        bool brute = false;
        for (unsigned mask = 1; mask < (1u << d); ++mask) {
            double s = 0.0;
            for (int b = 0; b < d; ++b) {
                if (mask & (1u << b)) s += x[static_cast<std::size_t>(b)];
            }
            if (s > subset_cap(SubsetCap::asymptotic, __builtin_popcount(mask), d) + 1e-9) brute = true;
        }
        const bool prefix = !separate(x, inst, 8).empty();
        violated += brute;
        mismatches += brute != prefix;
    }
    return {mismatches == 0, std::to_string(mismatches) + " disagreements over 500 vectors (" + std::to_string(violated) +
                                 " violated)"};
}

Outcome criterion10() {
    const fs::path dir = fs::temp_directory_path() / ("fairmatch_acceptance_" + std::to_string(getpid()));
    fs::create_directories(dir);
    const std::string cli = quote(FAIRMATCH_CLI);
    std::string detail;
    bool ok = true;
    auto must = [&](const std::string& cmd) {
        const CommandResult r = run_command(cmd);
        if (r.status != 0) {
            ok = false;
            detail += "command failed: " + cmd + "\n" + r.output;
        }
    };
    must(cli + " generate --kind synthetic --n-offline 40 -T 40 --degree 3 --weights uniform --groups partition:4 --seed 3 -o " +
         quote(dir / "inst.json"));
    int compared = 0;
    for (const std::string fmt_name : {"json", "csv"}) {
        for (int rep = 0; rep < 2; ++rep) {
            must(cli + " run --instance " + quote(dir / "inst.json") +
                 " --policy samp-b,samp-ab,greedy,ranking,mgs-lite --objective gfm --trials 500 --seed 10 --plan-seed 11"
                 " --sim-count 50 --threads 3 --out " + fmt_name + " -o " +
                 quote(dir / ("run" + std::to_string(rep) + "." + fmt_name)));
        }
        ok = ok && slurp(dir / ("run0." + fmt_name)) == slurp(dir / ("run1." + fmt_name)) &&
             !slurp(dir / ("run0." + fmt_name)).empty();
        ++compared;
    }
    {
        std::ofstream cfg(dir / "sweep.json");
        cfg << R"({"master_seed": 4, "objective": "vom", "policies": ["samp-b", "samp-ab", "greedy"], "trials": 200,
 "instances_per_cell": 2, "sim_count": 30, "threads": 2,
 "generator": {"kind": "synthetic", "weights": "uniform"}, "grid": {"horizon": [15, 25], "degree": [3]}})";
    }
    for (int rep = 0; rep < 2; ++rep) {
        must(cli + " sweep --config " + quote(dir / "sweep.json") + " -o " + quote(dir / ("rows" + std::to_string(rep) + ".csv")) +
             " --summary " + quote(dir / ("summary" + std::to_string(rep) + ".csv")));
    }
    ok = ok && slurp(dir / "rows0.csv") == slurp(dir / "rows1.csv") && slurp(dir / "summary0.csv") == slurp(dir / "summary1.csv") &&
         !slurp(dir / "rows0.csv").empty();
    compared += 2;
    fs::remove_all(dir);
    return {ok, detail.empty() ? std::to_string(compared) + " output pairs byte-identical (run json/csv, sweep rows/summary)"
                               : detail};
}

} // namespace

int main() {
    struct Entry {
        int id;
        const char* title;
        std::function<Outcome()> run;
        double budget_s;
    };
    const std::vector<Entry> entries = {
        {1, "SAMP-B bound at tau = 1", criterion1, 1},
        {2, "SAMP-AB bound grid minimum", criterion2, 60},
        {3, "minimizer-set structure vs brute force", criterion3, 600},
        {4, "LP upper-bounds the clairvoyant optimum", criterion4, 120},
        {5, "attenuation rescues the shared agent", criterion5, 600},
        {6, "SAMP-B vs greedy/ranking separation", criterion6, 300},
        {7, "SAMP-B CR1 on synthetic IFM cells", criterion7, 900},
        {8, "SAMP-AB ratio on GFM/VOM cells", criterion8, 1200},
        {9, "separation oracle exactness", criterion9, 60},
        {10, "run/sweep determinism", criterion10, 600},
    };
    int failures = 0;
    for (const Entry& e : entries) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = e.run();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= e.budget_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << e.id << ": " << e.title << "  [" << fmt(secs, 2)
                  << " s" << (in_time ? "" : ", over the " + fmt(e.budget_s, 0) + " s budget") << "]  " << o.detail
                  << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
