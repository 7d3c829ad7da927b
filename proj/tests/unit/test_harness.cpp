#include "helpers.hpp"

#include "fairmatch/error.hpp"
#include "fairmatch/bounds.hpp"
#include "fairmatch/harness.hpp"
#include "fairmatch/ingest.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace fairmatch;

namespace {

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

const char* kSweep = R"({
  "master_seed": 12,
  "objective": "ifm",
  "policies": ["samp-b", "greedy"],
  "trials": 200,
  "instances_per_cell": 1,
  "generator": {"kind": "synthetic", "weights": "unit", "groups": "singletons"},
  "grid": {"horizon": [10, 20], "degree": [2, 3]}
})";

} // namespace

TEST_CASE("single edge match rate") {
    const int T = 10;
    const Instance inst = testing::single_edge(T);
    ExperimentConfig cfg;
    cfg.policies = {"samp-b", "greedy"};
    cfg.run.trials = 10000;
    cfg.run.master_seed = 3;
    const ExperimentResult res = run_experiment(inst, cfg);
    const double p = 1.0 - std::pow(1.0 - 1.0 / T, T);
    for (const auto& r : res.reports) {
        CHECK(std::abs(r.z[0] - p) <= 3 * testing::binomial_sigma(p, 10000));
        CHECK(r.z_half[0] == doctest::Approx(kZ95 * std::sqrt(r.z[0] * (1 - r.z[0]) / 10000)));
    }
    CHECK(res.lp.value == doctest::Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("identity attenuation equals SAMP-B in the harness") {
    const Instance inst = generate_synthetic(30, 30, 3, WeightMode::unit, GroupMode::singletons(), 1);
    const LpSolution lp = normalize_ifm(solve_lp(inst, Objective::ifm), inst);
    const AttenuationTable id = AttenuationTable::identity(30, 30);
    PolicyContext ctx{&inst, &lp, &id, Objective::ifm};
    RunOptions o;
    o.trials = 500;
    o.master_seed = 5;
    const TrialReport a = run_policy("samp-b", ctx, lp.value, o);
    const TrialReport b = run_policy("samp-ab", ctx, lp.value, o);
    CHECK(a.matches == b.matches);
}

TEST_CASE("policies share arrival sequences") {
    // Single agent adjacent to every type: greedy and SAMP-B both match on the first arrival.
    Instance inst({1.0}, {1.0, 1.0, 1.0}, {{0, 0}, {0, 1}, {0, 2}}, {{0}}, 3);
    ExperimentConfig cfg;
    cfg.policies = {"samp-b", "greedy", "ranking"};
    cfg.run.trials = 300;
    const ExperimentResult res = run_experiment(inst, cfg);
    for (const auto& r : res.reports) CHECK(r.matches[0] == 300);

    for (long k = 0; k < 20; ++k) {
        const auto s = trial_seed(9, k);
        CHECK(sample_arrivals(inst, arrival_seed(s)).rounds == sample_arrivals(inst, arrival_seed(s)).rounds);
    }
}

TEST_CASE("half-widths shrink like one over root n") {
    const Instance inst = testing::single_edge(5);
    ExperimentConfig cfg;
    cfg.policies = {"greedy"};
    cfg.run.trials = 1000;
    const double h1 = run_experiment(inst, cfg).reports[0].z_half[0];
    cfg.run.trials = 16000;
    const double h2 = run_experiment(inst, cfg).reports[0].z_half[0];
    CHECK(h1 / h2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("results do not depend on the thread count") {
    const Instance inst = generate_synthetic(40, 40, 3, WeightMode::uniform, GroupMode::partition(4), 2);
    for (Objective obj : {Objective::ifm, Objective::vom}) {
        ExperimentConfig cfg;
        cfg.policies = {"samp-b", "ranking", "mgs-lite"};
        cfg.objective = obj;
        cfg.run.trials = 400;
        cfg.run.master_seed = 77;
        cfg.run.threads = 1;
        const auto one = run_experiment(inst, cfg);
        cfg.run.threads = 4;
        const auto four = run_experiment(inst, cfg);
        for (std::size_t p = 0; p < one.reports.size(); ++p) {
            CHECK(one.reports[p].matches == four.reports[p].matches);
            CHECK(one.reports[p].objective_estimate == four.reports[p].objective_estimate);
            CHECK(one.reports[p].cr1 == four.reports[p].cr1);
        }
    }
}

TEST_CASE("SAMP-B beats greedy on the worst-case instance") {
    const Instance inst = make_example_worst(30);
    ExperimentConfig cfg;
    cfg.policies = {"samp-b", "greedy"};
    cfg.run.trials = 2000;
    const auto res = run_experiment(inst, cfg);
    REQUIRE(res.reports[0].cr1);
    REQUIRE(res.reports[1].cr1);
    CHECK(*res.reports[0].cr1 > *res.reports[1].cr1 + 0.3);
}

TEST_CASE("CR2 is the objective over the LP value") {
    const Instance inst = generate_synthetic(20, 20, 3, WeightMode::uniform, GroupMode::singletons(), 4);
    ExperimentConfig cfg;
    cfg.objective = Objective::vom;
    cfg.policies = {"samp-b"};
    cfg.run.trials = 300;
    const auto res = run_experiment(inst, cfg);
    const TrialReport& r = res.reports[0];
    REQUIRE(r.cr2);
    CHECK(*r.cr2 == doctest::Approx(r.objective_estimate / res.lp.value));
    double direct = 0.0;
    for (int i = 0; i < 20; ++i) direct += inst.weight(i) * r.z[static_cast<std::size_t>(i)];
    CHECK(r.objective_estimate == doctest::Approx(direct));
}

TEST_CASE("experiment errors") {
    const Instance inst = testing::complete(2, 2);
    ExperimentConfig cfg;
    cfg.policies = {};
    CHECK_THROWS_AS(run_experiment(inst, cfg), UsageError);
    cfg.policies = {"samp-b"};
    cfg.run.trials = 0;
    CHECK_THROWS_AS(run_experiment(inst, cfg), UsageError);
    cfg.run.trials = 10;
    Instance nc({1.0}, {2.0}, {{0, 0}}, {{0}}, 2);
    CHECK_THROWS_AS(run_experiment(nc, cfg), DataError);
    Instance invalid({1.0}, {1.0, 0.5}, {{0, 0}}, {}, 2);
    CHECK_THROWS_AS(run_experiment(invalid, cfg), DataError);
    cfg.policies = {"nope"};
    CHECK_THROWS_AS(run_experiment(inst, cfg), UsageError);
}

TEST_CASE("report JSON round-trip and CSV") {
    const Instance inst = testing::path();
    ExperimentConfig cfg;
    cfg.policies = {"samp-b", "greedy"};
    cfg.run.trials = 50;
    const auto res = run_experiment(inst, cfg);
    std::stringstream js;
    write_report_json(js, res.reports, instance_hash(inst));
    const auto back = read_report_json(js);
    REQUIRE(back.size() == 2);
    CHECK(back[0].policy == "samp-b");
    CHECK(back[0].matches == res.reports[0].matches);
    CHECK(back[1].cr1 == res.reports[1].cr1);
    CHECK(back[1].z == res.reports[1].z);

    std::ostringstream csv;
    write_report_csv(csv, res.reports, instance_hash(inst));
    CHECK(count_lines(csv.str()) == 3);

    std::istringstream junk("{}");
    CHECK_THROWS_AS(read_report_json(junk), DataError);
}

TEST_CASE("sweep output shape and reproducibility") {
    const SweepOutput a = sweep(kSweep);
    CHECK(count_lines(a.rows_csv) == 1 + 8);
    CHECK(count_lines(a.summary_csv) == 1 + 8);
    const SweepOutput b = sweep(kSweep);
    CHECK(a.rows_csv == b.rows_csv);
    CHECK(a.summary_csv == b.summary_csv);
    CHECK(a.config_hash == b.config_hash);
}

TEST_CASE("sweep config errors") {
    CHECK_THROWS_AS(sweep("{\"policies\": [\"samp-b\"], \"color\": 1}"), DataError);
    CHECK_THROWS_AS(sweep("not json"), DataError);
    CHECK_THROWS_AS(sweep("{}"), DataError);
    CHECK_THROWS_AS(sweep(R"({"policies": ["samp-b"], "generator": {"kind": "moon"}})"), DataError);
    CHECK_THROWS_AS(sweep(R"({"policies": ["what"]})"), UsageError);
}
