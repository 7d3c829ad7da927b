#include "fairmatch/attenuation.hpp"
#include "fairmatch/benchmark_lp.hpp"
#include "fairmatch/bounds.hpp"
#include "fairmatch/error.hpp"
#include "fairmatch/harness.hpp"
#include "fairmatch/ingest.hpp"
#include "fairmatch/instance.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace fairmatch;

namespace {

// Writes to a file when a path is given, stdout otherwise.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw DataError("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Instance load_canonical(const std::string& path) {
    Instance inst = read_instance_file(path);
    const auto violations = validate(inst);
    if (!violations.empty()) {
        std::string msg = path + " is not a valid instance:";
        for (const auto& v : violations) msg += "\n  " + v.invariant + ": " + v.detail;
        throw DataError(msg);
    }
    for (const auto& w : lint(inst)) std::cerr << "warning: " << w << "\n";
    return is_canonical(inst) ? inst : canonicalize(inst);
}

LpSolution load_lp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_lp_solution(in);
}

SubsetCap parse_cap(const std::string& s) {
    if (s == "asymptotic") return SubsetCap::asymptotic;
    if (s == "finite-horizon") return SubsetCap::finite_horizon;
    throw UsageError("unknown cap '" + s + "' (expected asymptotic or finite-horizon)");
}

std::vector<std::string> split_policies(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::stringstream ss(item);
        std::string p;
        while (std::getline(ss, p, ',')) {
            if (!p.empty()) out.push_back(p);
        }
    }
    return out;
}

void print_set(std::ostream& out, const std::vector<double>& set) {
    out << "{";
    for (std::size_t k = 0; k < set.size(); ++k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.5f", set[k]);
        out << (k ? ", " : "") << buf;
    }
    out << "}";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LP-guided online matching under known i.i.d. arrivals"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic or adversarial instance");
    std::string gen_kind = "synthetic", gen_weights = "unit", gen_groups = "singletons", gen_out;
    int gen_n_offline = 100, gen_horizon = 100, gen_degree = 3, gen_n = 10;
    std::uint64_t gen_seed = 0;
    gen->add_option("--kind", gen_kind, "synthetic | example1 | example-worst")->capture_default_str();
    gen->add_option("--n-offline", gen_n_offline)->capture_default_str();
    gen->add_option("--horizon,-T", gen_horizon)->capture_default_str();
    gen->add_option("--degree", gen_degree)->capture_default_str();
    gen->add_option("--weights", gen_weights, "unit | uniform")->capture_default_str();
    gen->add_option("--groups", gen_groups, "singletons | partition:<k>")->capture_default_str();
    gen->add_option("--n", gen_n, "size for example1 / example-worst")->capture_default_str();
    gen->add_option("--seed", gen_seed)->capture_default_str();
    gen->add_option("-o,--output", gen_out, "output path (default stdout)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "build an instance from external data");
    ingest->require_subcommand(1);
    auto* trips = ingest->add_subcommand("trips", "ride-hailing trips CSV");
    std::string trips_csv, trips_out;
    TripOptions trip_opts;
    trip_opts.horizon = 100;
    trips->add_option("--csv", trips_csv)->required();
    trips->add_option("--horizon,-T", trip_opts.horizon)->capture_default_str();
    trips->add_option("--seed", trip_opts.seed)->capture_default_str();
    trips->add_option("--window-start", trip_opts.window.start)->capture_default_str();
    trips->add_option("--window-end", trip_opts.window.end)->capture_default_str();
    trips->add_option("--pickup-column", trip_opts.columns.pickup)->capture_default_str();
    trips->add_option("--dropoff-column", trip_opts.columns.dropoff)->capture_default_str();
    trips->add_option("--start-column", trip_opts.columns.start)->capture_default_str();
    trips->add_option("-o,--output", trips_out);

    auto* graph = ingest->add_subcommand("graph", "edge list split into a random balanced bipartition");
    std::string graph_edges, graph_out;
    std::uint64_t graph_seed = 0, graph_weight_seed = 1;
    int graph_nodes = 200;
    graph->add_option("--edges", graph_edges)->required();
    graph->add_option("--seed", graph_seed)->capture_default_str();
    graph->add_option("--weight-seed", graph_weight_seed)->capture_default_str();
    graph->add_option("--downsample", graph_nodes, "node count kept before partitioning")->capture_default_str();
    graph->add_option("-o,--output", graph_out);

    // solve-lp
    auto* solve_cmd = app.add_subcommand("solve-lp", "solve the benchmark LP with lazy subset cuts");
    std::string lp_instance, lp_objective = "ifm", lp_out, lp_export, lp_cap = "asymptotic";
    std::optional<int> lp_k_cap;
    bool lp_keep_isolated = false, lp_normalize = false;
    solve_cmd->add_option("--instance", lp_instance)->required();
    solve_cmd->add_option("--objective", lp_objective, "ifm | gfm | vom")->capture_default_str();
    solve_cmd->add_option("--k-cap", lp_k_cap, "largest subset size (default min(20, max degree))");
    solve_cmd->add_option("--cap", lp_cap, "asymptotic | finite-horizon")->capture_default_str();
    solve_cmd->add_flag("--keep-isolated", lp_keep_isolated, "keep isolated agents in the min");
    solve_cmd->add_flag("--normalize", lp_normalize, "scale IFM rows down to tau");
    solve_cmd->add_option("--export-lp", lp_export, "also write the cut model in LP format");
    solve_cmd->add_option("-o,--output", lp_out);

    // plan-attenuation
    auto* plan_cmd = app.add_subcommand("plan-attenuation", "Monte-Carlo attenuation table for samp-ab");
    std::string plan_instance, plan_lp, plan_objective = "ifm", plan_out;
    PlanOptions plan_opts;
    plan_cmd->add_option("--instance", plan_instance)->required();
    plan_cmd->add_option("--lp", plan_lp, "LP solution file (solved here when omitted)");
    plan_cmd->add_option("--objective", plan_objective)->capture_default_str();
    plan_cmd->add_option("--sim-count", plan_opts.sim_count)->capture_default_str();
    plan_cmd->add_option("--seed", plan_opts.seed)->capture_default_str();
    plan_cmd->add_option("--stride", plan_opts.stride)->capture_default_str();
    plan_cmd->add_option("-o,--output", plan_out);

    // run
    auto* run_cmd = app.add_subcommand("run", "simulate policies on one instance");
    std::string run_instance, run_objective = "ifm", run_format = "json", run_output;
    std::vector<std::string> run_policies_raw{"samp-b"};
    ExperimentConfig run_cfg;
    std::optional<int> run_k_cap;
    run_cmd->add_option("--instance", run_instance)->required();
    run_cmd->add_option("--policy", run_policies_raw, "comma separated or repeated")->capture_default_str();
    run_cmd->add_option("--objective", run_objective)->capture_default_str();
    run_cmd->add_option("--trials", run_cfg.run.trials)->capture_default_str();
    run_cmd->add_option("--seed", run_cfg.run.master_seed)->capture_default_str();
    run_cmd->add_option("--threads", run_cfg.run.threads)->capture_default_str();
    run_cmd->add_option("--k-cap", run_k_cap);
    run_cmd->add_option("--sim-count", run_cfg.plan.sim_count)->capture_default_str();
    run_cmd->add_option("--plan-seed", run_cfg.plan.seed)->capture_default_str();
    run_cmd->add_option("--out", run_format, "json | csv")->capture_default_str();
    run_cmd->add_option("-o,--output", run_output);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "grid of instances x policies from a JSON config");
    std::string sweep_config, sweep_output, sweep_summary;
    sweep_cmd->add_option("--config", sweep_config)->required();
    sweep_cmd->add_option("-o,--output", sweep_output, "per-instance rows CSV");
    sweep_cmd->add_option("--summary", sweep_summary, "per-cell means CSV");

    // bound
    auto* bound_cmd = app.add_subcommand("bound", "evaluate the analytical bounds");
    std::string bound_kind;
    double bound_tau = 1.0, bound_x = 1.0 - std::exp(-1.0), bound_kappa = 1.0;
    bool bound_grid = false, bound_capped = false;
    int bound_points = 400;
    bound_cmd->add_option("kind", bound_kind, "sampb | sampab | minimizer-set")->required();
    bound_cmd->add_option("--tau", bound_tau)->capture_default_str();
    bound_cmd->add_option("--x", bound_x)->capture_default_str();
    bound_cmd->add_option("--kappa", bound_kappa)->capture_default_str();
    bound_cmd->add_flag("--grid", bound_grid, "minimize F(x,kappa)/x over the unit square");
    bound_cmd->add_option("--points", bound_points, "grid points per axis")->capture_default_str();
    bound_cmd->add_flag("--capped", bound_capped, "three-piece minimizer set");

    // report
    auto* report_cmd = app.add_subcommand("report", "summarize a run report");
    std::string report_in, report_format = "text";
    report_cmd->add_option("--in", report_in)->required();
    report_cmd->add_option("--out", report_format, "text | csv")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            Instance inst;
            if (gen_kind == "synthetic") {
                inst = generate_synthetic(gen_n_offline, gen_horizon, gen_degree, parse_weight_mode(gen_weights),
                                          parse_group_mode(gen_groups), gen_seed);
            } else if (gen_kind == "example1") {
                inst = make_example1(gen_n);
            } else if (gen_kind == "example-worst") {
                inst = make_example_worst(gen_n);
            } else {
                throw UsageError("unknown --kind '" + gen_kind + "'");
            }
            Sink sink(gen_out);
            write_instance(sink.stream(), inst);
        } else if (*trips) {
            std::ifstream in(trips_csv);
            if (!in) throw DataError("cannot open " + trips_csv);
            TripParseReport rep;
            const Instance inst = parse_trips(in, trip_opts, &rep);
            std::cerr << "rows " << rep.rows << ", skipped " << rep.skipped << ", in window " << rep.in_window << "\n";
            for (const auto& m : rep.messages) std::cerr << "  skipped " << m << "\n";
            Sink sink(trips_out);
            write_instance(sink.stream(), inst);
        } else if (*graph) {
            std::ifstream in(graph_edges);
            if (!in) throw DataError("cannot open " + graph_edges);
            const EdgeListGraph g = downsample(read_edge_list(in), graph_nodes, graph_seed ^ 0xD0D0ULL);
            const Instance inst = balanced_partition(g, graph_seed, graph_weight_seed);
            Sink sink(graph_out);
            write_instance(sink.stream(), inst);
        } else if (*solve_cmd) {
            const Instance inst = load_canonical(lp_instance);
            LpOptions opts;
            opts.k_cap = lp_k_cap;
            opts.cap = parse_cap(lp_cap);
            opts.drop_isolated = !lp_keep_isolated;
            const Objective obj = parse_objective(lp_objective);
            const LpModel model = build_lp(inst, obj, opts);
            for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";
            LpSolution sol = solve(model, inst, opts);
            if (lp_normalize && obj == Objective::ifm) sol = normalize_ifm(sol, inst);
            std::cerr << "value " << sol.value << ", cuts " << sol.cut_count << ", rounds " << sol.rounds << "\n";
            if (!lp_export.empty()) {
                std::ofstream lp(lp_export);
                if (!lp) throw DataError("cannot write " + lp_export);
                export_lp(lp, model, sol, inst);
            }
            Sink sink(lp_out);
            write_lp_solution(sink.stream(), sol, instance_hash(inst));
        } else if (*plan_cmd) {
            const Instance inst = load_canonical(plan_instance);
            LpSolution sol;
            if (plan_lp.empty()) {
                const Objective obj = parse_objective(plan_objective);
                sol = solve_lp(inst, obj);
                if (obj == Objective::ifm) sol = normalize_ifm(sol, inst);
            } else {
                sol = load_lp(plan_lp);
                if (sol.x.size() != inst.edges().size()) throw DataError("LP solution does not match the instance");
            }
            AttenuationTable table = plan(inst, sol, plan_opts);
            table.instance_hash = instance_hash(inst);
            table.lp_hash = lp_hash(sol);
            Sink sink(plan_out);
            write_table(sink.stream(), table);
        } else if (*run_cmd) {
            const Instance inst = load_canonical(run_instance);
            run_cfg.policies = split_policies(run_policies_raw);
            run_cfg.objective = parse_objective(run_objective);
            run_cfg.lp.k_cap = run_k_cap;
            if (run_format != "json" && run_format != "csv") throw UsageError("--out must be json or csv");
            const ExperimentResult res = run_experiment(inst, run_cfg);
            Sink sink(run_output);
            if (run_format == "json") {
                write_report_json(sink.stream(), res.reports, instance_hash(inst));
            } else {
                write_report_csv(sink.stream(), res.reports, instance_hash(inst));
            }
        } else if (*sweep_cmd) {
            const SweepOutput out = sweep(slurp(sweep_config));
            Sink sink(sweep_output);
            sink.stream() << out.rows_csv;
            if (!sweep_summary.empty()) {
                Sink summary(sweep_summary);
                summary.stream() << out.summary_csv;
            }
        } else if (*bound_cmd) {
            if (bound_kind == "sampb") {
                std::printf("sampb(tau=%.6f) = %.6f\n", bound_tau, sampb_bound(bound_tau));
                std::cout << "set ";
                print_set(std::cout, minimizer_set(bound_tau));
                std::cout << "\n";
            } else if (bound_kind == "sampab") {
                if (bound_grid) {
                    GridOptions g;
                    g.x_points = bound_points;
                    g.kappa_points = bound_points;
                    const BoundEvaluation b = minimize_sampab_ratio(g);
                    std::printf("min F(x,kappa)/x = %.6f at (x=%.6f, kappa=%.6f)\n", b.value, b.x, b.kappa);
                } else {
                    const double f = sampab_bound(bound_x, bound_kappa);
                    std::printf("F(x=%.6f, kappa=%.6f) = %.6f, F/x = %.6f\n", bound_x, bound_kappa, f, f / bound_x);
                }
            } else if (bound_kind == "minimizer-set") {
                print_set(std::cout, bound_capped ? minimizer_set_capped(bound_tau) : minimizer_set(bound_tau));
                std::cout << "\n";
            } else {
                throw UsageError("unknown bound '" + bound_kind + "' (expected sampb, sampab or minimizer-set)");
            }
        } else if (*report_cmd) {
            std::ifstream in(report_in);
            if (!in) throw DataError("cannot open " + report_in);
            const auto reports = read_report_json(in);
            if (report_format == "csv") {
                write_report_csv(std::cout, reports, "");
            } else if (report_format == "text") {
                print_report(std::cout, reports);
            } else {
                throw UsageError("--out must be text or csv");
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
