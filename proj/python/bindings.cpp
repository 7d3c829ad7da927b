#include "fairmatch/attenuation.hpp"
#include "fairmatch/benchmark_lp.hpp"
#include "fairmatch/bounds.hpp"
#include "fairmatch/error.hpp"
#include "fairmatch/harness.hpp"
#include "fairmatch/ingest.hpp"
#include "fairmatch/instance.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace fairmatch;

namespace {

Instance make_instance(std::vector<double> weights, std::vector<double> rates,
                       const std::vector<std::pair<int, int>>& edges, std::vector<std::vector<int>> groups,
                       int horizon) {
    std::vector<Edge> e;
    e.reserve(edges.size());
    for (const auto& [i, j] : edges) e.push_back({i, j});
    return Instance(std::move(weights), std::move(rates), std::move(e), std::move(groups), horizon);
}

py::dict report_dict(const TrialReport& r) {
    py::dict d;
    d["policy"] = r.policy;
    d["objective"] = std::string(to_string(r.objective));
    d["trials"] = r.trials;
    d["master_seed"] = r.master_seed;
    d["z"] = r.z;
    d["z_half_width"] = r.z_half;
    d["objective_estimate"] = r.objective_estimate;
    d["objective_half_width"] = r.objective_half;
    d["lp_value"] = r.lp_value;
    d["cr1"] = r.cr1 ? py::cast(*r.cr1) : py::none();
    d["cr1_half_width"] = r.cr1_half;
    d["cr1_agent"] = r.cr1_agent;
    d["cr2"] = r.cr2 ? py::cast(*r.cr2) : py::none();
    d["cr2_half_width"] = r.cr2_half;
    d["mean_matched"] = r.mean_matched;
    return d;
}

LpOptions lp_options(std::optional<int> k_cap, const std::string& cap) {
    LpOptions o;
    o.k_cap = k_cap;
    if (cap == "asymptotic") {
        o.cap = SubsetCap::asymptotic;
    } else if (cap == "finite-horizon") {
        o.cap = SubsetCap::finite_horizon;
    } else {
        throw UsageError("cap must be 'asymptotic' or 'finite-horizon'");
    }
    return o;
}

} // namespace

PYBIND11_MODULE(_fairmatch, m) {
    m.doc() = "Fair online bipartite matching under known i.i.d. arrivals";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<InternalError>(m, "InternalError", PyExc_RuntimeError);

    py::class_<Instance>(m, "Instance")
        .def(py::init(&make_instance), py::arg("weights"), py::arg("rates"), py::arg("edges"),
             py::arg("groups") = std::vector<std::vector<int>>{}, py::arg("horizon"))
        .def_property_readonly("num_offline", &Instance::num_offline)
        .def_property_readonly("num_online", &Instance::num_online)
        .def_property_readonly("horizon", &Instance::horizon)
        .def_property_readonly("weights", [](const Instance& s) { return std::vector<double>(s.weights().begin(), s.weights().end()); })
        .def_property_readonly("rates", [](const Instance& s) { return std::vector<double>(s.rates().begin(), s.rates().end()); })
        .def_property_readonly("edges", [](const Instance& s) {
            std::vector<std::pair<int, int>> out;
            for (const Edge& e : s.edges()) out.emplace_back(e.offline, e.online);
            return out;
        })
        .def_property_readonly("groups", &Instance::groups)
        .def("validate", [](const Instance& s) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& v : validate(s)) out.emplace_back(v.invariant, v.detail);
            return out;
        })
        .def("canonicalize", [](const Instance& s) { return canonicalize(s); })
        .def("is_canonical", [](const Instance& s) { return is_canonical(s); })
        .def("to_json", [](const Instance& s) {
            std::ostringstream out;
            write_instance(out, s);
            return out.str();
        })
        .def_static("from_json", [](const std::string& text) {
            std::istringstream in(text);
            return read_instance(in);
        })
        .def("hash", [](const Instance& s) { return instance_hash(s); })
        .def("__eq__", [](const Instance& a, const Instance& b) { return a == b; })
        .def("__repr__", [](const Instance& s) {
            return "<Instance |I|=" + std::to_string(s.num_offline()) + " |J|=" + std::to_string(s.num_online()) +
                   " T=" + std::to_string(s.horizon()) + ">";
        });

    py::class_<LpSolution>(m, "LpSolution")
        .def_readonly("x", &LpSolution::x)
        .def_readonly("agent_mass", &LpSolution::agent_mass)
        .def_readonly("value", &LpSolution::value)
        .def_readonly("cut_count", &LpSolution::cut_count)
        .def_readonly("rounds", &LpSolution::rounds)
        .def_property_readonly("objective", [](const LpSolution& s) { return std::string(to_string(s.objective)); });

    m.def("generate_synthetic",
          [](int n_offline, int horizon, int degree, const std::string& weights, const std::string& groups,
             std::uint64_t seed) {
              return generate_synthetic(n_offline, horizon, degree, parse_weight_mode(weights), parse_group_mode(groups), seed);
          },
          py::arg("n_offline"), py::arg("horizon"), py::arg("degree"), py::arg("weights") = "unit",
          py::arg("groups") = "singletons", py::arg("seed") = 0);
    m.def("make_example1", &make_example1, py::arg("n"));
    m.def("make_example_worst", &make_example_worst, py::arg("n"));
    m.def("read_instance_file", &read_instance_file, py::arg("path"));

    m.def("solve_lp",
          [](const Instance& inst, const std::string& objective, std::optional<int> k_cap, const std::string& cap,
             bool normalize) {
              const Objective obj = parse_objective(objective);
              LpSolution s = solve_lp(inst, obj, lp_options(k_cap, cap));
              if (normalize && obj == Objective::ifm) s = normalize_ifm(s, inst);
              return s;
          },
          py::arg("instance"), py::arg("objective") = "ifm", py::arg("k_cap") = py::none(),
          py::arg("cap") = "asymptotic", py::arg("normalize") = false);
    m.def("clairvoyant_oracle",
          [](const Instance& inst, const std::string& objective) {
              return clairvoyant_oracle(inst, parse_objective(objective));
          },
          py::arg("instance"), py::arg("objective") = "ifm");

    m.def("plan_attenuation",
          [](const Instance& inst, const LpSolution& lp, int sim_count, std::uint64_t seed, int stride) {
              const AttenuationTable t = plan(inst, lp, {sim_count, seed, stride});
              std::vector<std::vector<double>> beta(static_cast<std::size_t>(t.num_offline));
              for (int i = 0; i < t.num_offline; ++i) {
                  for (int s = 1; s <= t.horizon; ++s) beta[static_cast<std::size_t>(i)].push_back(t.beta_at(i, s));
              }
              return beta;
          },
          py::arg("instance"), py::arg("lp"), py::arg("sim_count") = 100, py::arg("seed") = 0, py::arg("stride") = 1,
          "beta[i][t-1] for every offline agent and round");

    m.def("run_experiment",
          [](const Instance& inst, const std::vector<std::string>& policies, const std::string& objective, long trials,
             std::uint64_t seed, int threads, int sim_count, std::uint64_t plan_seed) {
              ExperimentConfig cfg;
              cfg.policies = policies;
              cfg.objective = parse_objective(objective);
              cfg.run = {trials, seed, threads};
              cfg.plan.sim_count = sim_count;
              cfg.plan.seed = plan_seed;
              ExperimentResult res;
              {
                  py::gil_scoped_release release;
                  res = run_experiment(inst, cfg);
              }
              py::list out;
              for (const auto& r : res.reports) out.append(report_dict(r));
              return out;
          },
          py::arg("instance"), py::arg("policies") = std::vector<std::string>{"samp-b"}, py::arg("objective") = "ifm",
          py::arg("trials") = 100, py::arg("seed") = 0, py::arg("threads") = 1, py::arg("sim_count") = 100,
          py::arg("plan_seed") = 0);

    m.def("sweep",
          [](const std::string& config_json) {
              const SweepOutput s = sweep(config_json);
              return py::make_tuple(s.rows_csv, s.summary_csv);
          },
          py::arg("config_json"), "returns (rows_csv, summary_csv)");

    m.def("sampb_bound", &sampb_bound, py::arg("tau"));
    m.def("sampab_bound", &sampab_bound, py::arg("x"), py::arg("kappa"));
    m.def("minimizer_set", &minimizer_set, py::arg("tau"));
    m.def("minimize_sampab_ratio",
          [](int points) {
              GridOptions g;
              g.x_points = points;
              g.kappa_points = points;
              const BoundEvaluation e = minimize_sampab_ratio(g);
              return py::make_tuple(e.value, e.x, e.kappa);
          },
          py::arg("points") = 400, "returns (min F/x, x, kappa)");
    m.def("policy_names", &policy_names);
}
