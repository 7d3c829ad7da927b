#include "helpers.hpp"

#include "fairmatch/benchmark_lp.hpp"
#include "fairmatch/bounds.hpp"
#include "fairmatch/error.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace fairmatch;

namespace {

const double kOneMinusInvE = 1.0 - std::exp(-1.0);

// Brute force over all subsets of each N_i with |S| <= K.
bool brute_force_violated(const std::vector<double>& x, const Instance& inst, int k_cap) {
    for (int i = 0; i < inst.num_offline(); ++i) {
        const auto nbrs = inst.offline_neighbors(i);
        const int d = static_cast<int>(nbrs.size());
        for (unsigned mask = 1; mask < (1u << d); ++mask) {
            const int s = __builtin_popcount(mask);
            if (s > k_cap) continue;
            double sum = 0.0;
            for (int b = 0; b < d; ++b) {
                if (mask & (1u << b)) sum += x[static_cast<std::size_t>(nbrs[static_cast<std::size_t>(b)].edge)];
            }
            if (sum > subset_cap(SubsetCap::asymptotic, s, inst.horizon()) + 1e-9) return true;
        }
    }
    return false;
}

} // namespace

TEST_CASE("path instance model shape") {
    const Instance inst = testing::path();
    const LpModel m = build_lp(inst, Objective::ifm);
    CHECK(m.num_edges == 3);
    CHECK(m.has_lambda);
    CHECK(m.problem.num_vars == 4);
    CHECK(m.online_rows == 2);
    CHECK(m.offline_rows == 2);
    CHECK(m.link_rows == 2);
    CHECK(m.problem.rows.size() == 6);
}

TEST_CASE("VOM model has no lambda") {
    const LpModel m = build_lp(testing::path(), Objective::vom);
    CHECK_FALSE(m.has_lambda);
    CHECK(m.problem.num_vars == 3);
    CHECK(m.link_rows == 0);
}

TEST_CASE("GFM with one group is the mean mass") {
    Instance inst({1, 1, 1}, {1, 1, 1}, {{0, 0}, {1, 0}, {1, 1}, {2, 2}}, {{0, 1, 2}}, 3);
    const LpSolution s = solve_lp(inst, Objective::gfm);
    double total = 0.0;
    for (double m : s.agent_mass) total += m;
    CHECK(s.value == doctest::Approx(total / 3.0).epsilon(1e-9));
}

TEST_CASE("GFM without groups is rejected") {
    Instance inst({1.0}, {1.0}, {{0, 0}}, {}, 1);
    CHECK_THROWS_AS(build_lp(inst, Objective::gfm), DataError);
}

TEST_CASE("non-canonical instance is rejected") {
    Instance inst({1.0}, {2.0}, {{0, 0}}, {{0}}, 2);
    CHECK_THROWS_AS(build_lp(inst, Objective::ifm), DataError);
}

TEST_CASE("separate: single neighbor above 1 - 1/e") {
    Instance inst({1.0}, {1.0}, {{0, 0}}, {{0}}, 1);
    const auto cuts = separate(std::vector<double>{0.8}, inst, 1);
    REQUIRE(cuts.size() == 1);
    CHECK(cuts[0].agent == 0);
    CHECK(cuts[0].edges == std::vector<int>{0});
    CHECK(cuts[0].rhs == doctest::Approx(kOneMinusInvE));
    CHECK(cuts[0].violation == doctest::Approx(0.8 - kOneMinusInvE));
}

TEST_CASE("separate: (0.6, 0.2) is feasible, zeros are feasible") {
    Instance inst({1.0}, {1.0, 1.0}, {{0, 0}, {0, 1}}, {{0}}, 2);
    CHECK(separate(std::vector<double>{0.6, 0.2}, inst, 2).empty());
    CHECK(separate(std::vector<double>{0.0, 0.0}, inst, 2).empty());
}

TEST_CASE("separation matches subset enumeration") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 1 + static_cast<int>(rng.index(8));
        std::vector<Edge> edges;
        for (int j = 0; j < d; ++j) edges.push_back({0, j});
        Instance inst({1.0}, std::vector<double>(static_cast<std::size_t>(d), 1.0), edges, {{0}}, d);
        std::vector<double> x(static_cast<std::size_t>(d));
        const double scale = 0.2 + rng.uniform();
        for (double& v : x) v = rng.uniform() * scale * (rng.bernoulli(0.3) ? 1.0 : 0.3);
        const bool brute = brute_force_violated(x, inst, 8);
        CHECK(brute == !separate(x, inst, 8).empty());
    }
}

TEST_CASE("single edge IFM and the worst-case instance give 1 - 1/e") {
    Instance inst({1.0}, {1.0}, {{0, 0}}, {{0}}, 1);
    CHECK(solve_lp(inst, Objective::ifm).value == doctest::Approx(kOneMinusInvE).epsilon(1e-9));
    const LpSolution s = solve_lp(make_example_worst(8), Objective::ifm);
    CHECK(s.value == doctest::Approx(kOneMinusInvE).epsilon(1e-9));
}

TEST_CASE("worst-case closed form is feasible") {
    const Instance inst = make_example_worst(6);
    // Agent 0 takes all of type 0 it may; the others use their private type.
    std::vector<double> x(inst.edges().size(), 0.0);
    for (std::size_t e = 0; e < inst.edges().size(); ++e) {
        const Edge& edge = inst.edges()[e];
        if ((edge.offline == 0 && edge.online == 0) || (edge.offline > 0 && edge.online == edge.offline)) {
            x[e] = kOneMinusInvE;
        }
    }
    CHECK(check_feasibility(x, inst, default_k_cap(inst)).worst() <= 1e-9);
    CHECK(evaluate_objective(x, inst, Objective::ifm) == doctest::Approx(kOneMinusInvE));
}

TEST_CASE("shared-agent example LP value") {
    LpOptions opts;
    opts.cap = SubsetCap::finite_horizon;
    const Instance inst = make_example1(10);
    const LpSolution s = solve_lp(inst, Objective::vom, opts);
    const double eps = 0.1;
    CHECK(std::abs(s.value - (1 + eps * eps - eps * eps * eps)) < 1e-6);
    const LpSolution ref = example1_reference_solution(inst);
    CHECK(std::abs(ref.value - s.value) < 1e-9);
    CHECK(check_feasibility(ref.x, inst, default_k_cap(inst), SubsetCap::finite_horizon).worst() <= 1e-9);
}

TEST_CASE("solver output is feasible and optimal for its cuts") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Instance inst = generate_synthetic(30, 30, 4, WeightMode::uniform, GroupMode::partition(3), seed);
        for (Objective obj : {Objective::ifm, Objective::gfm, Objective::vom}) {
            const LpSolution s = solve_lp(inst, obj);
            CHECK(check_feasibility(s.x, inst, default_k_cap(inst)).worst() <= 1e-9);
            CHECK(separate(s.x, inst, default_k_cap(inst)).empty());
            CHECK(evaluate_objective(s.x, inst, obj) == doctest::Approx(s.value).epsilon(1e-8));
        }
    }
}

TEST_CASE("LP optimum decreases with K") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Instance inst = generate_synthetic(20, 20, 8, WeightMode::uniform, GroupMode::singletons(), seed);
        for (Objective obj : {Objective::ifm, Objective::vom}) {
            double prev = 1e300;
            for (int k : {1, 2, 4, 8}) {
                LpOptions o;
                o.k_cap = k;
                const double v = solve_lp(inst, obj, o).value;
                CHECK(v <= prev + 1e-9);
                prev = v;
            }
        }
    }
}

TEST_CASE("normalize_ifm scales rows above tau") {
    Instance inst({1.0, 1.0}, {1.0, 1.0}, {{0, 0}, {1, 1}}, {{0}, {1}}, 2);
    LpSolution s;
    s.objective = Objective::ifm;
    s.x = {0.5, 1.0};
    s.value = 0.5;
    const LpSolution n = normalize_ifm(s, inst);
    CHECK(n.x[0] == 0.5);
    CHECK(n.x[1] == doctest::Approx(0.5));
    CHECK(normalize_ifm(n, inst).x == n.x);

    s.value = -1.0;
    CHECK_THROWS_AS(normalize_ifm(s, inst), InternalError);
}

TEST_CASE("normalize_ifm keeps value and feasibility") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Instance inst = generate_synthetic(25, 25, 3, WeightMode::unit, GroupMode::singletons(), seed + 10);
        const LpSolution s = solve_lp(inst, Objective::ifm);
        const LpSolution n = normalize_ifm(s, inst);
        CHECK(evaluate_objective(n.x, inst, Objective::ifm) == doctest::Approx(s.value).epsilon(1e-9));
        CHECK(check_feasibility(n.x, inst, default_k_cap(inst)).worst() <= 1e-9);
        for (int i = 0; i < inst.num_offline(); ++i) {
            if (!inst.is_isolated(i)) CHECK(n.agent_mass[static_cast<std::size_t>(i)] == doctest::Approx(s.value).epsilon(1e-9));
        }
    }
}

TEST_CASE("check_feasibility reports family violations") {
    Instance inst({1, 1, 1}, {1, 1, 1}, {{0, 0}, {1, 0}, {2, 0}}, {}, 3);
    const auto r = check_feasibility(std::vector<double>{0.5, 0.5, 0.3}, inst, 1);
    CHECK(r.online_capacity == doctest::Approx(0.3));
    CHECK(r.offline_capacity == 0.0);
}

TEST_CASE("uniform 1/T on the complete instance is feasible") {
    const int T = 50;
    const Instance inst = testing::complete(T, T);
    const std::vector<double> x(inst.edges().size(), 1.0 / T);
    CHECK(check_feasibility(x, inst, default_k_cap(inst)).worst() <= 1e-9);
}

TEST_CASE("isolated agents are dropped from the IFM min by default") {
    Instance inst({1.0, 1.0}, {1.0}, {{0, 0}}, {{0}, {1}}, 1);
    const LpModel m = build_lp(inst, Objective::ifm);
    CHECK(m.warnings.size() == 1);
    CHECK(solve_lp(inst, Objective::ifm).value == doctest::Approx(kOneMinusInvE));
    LpOptions keep;
    keep.drop_isolated = false;
    CHECK(solve_lp(inst, Objective::ifm, keep).value == doctest::Approx(0.0));
}

TEST_CASE("LP upper-bounds the clairvoyant optimum with the exact finite-T cap") {
    LpOptions opts;
    opts.cap = SubsetCap::finite_horizon;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed);
        const int n_i = 1 + static_cast<int>(rng.index(4));
        const int T = 1 + static_cast<int>(rng.index(4));
        const Instance inst = testing::random_tiny(n_i, T, seed * 31 + 7);
        for (Objective obj : {Objective::ifm, Objective::gfm, Objective::vom}) {
            const double lp = solve_lp(inst, obj, opts).value;
            const double opt = clairvoyant_oracle(inst, obj);
            CHECK(lp >= opt - 1e-6);
        }
    }
}

TEST_CASE("LP export names variables and rows") {
    const Instance inst = testing::path();
    const LpModel m = build_lp(inst, Objective::ifm);
    const LpSolution s = solve(m, inst);
    std::ostringstream out;
    export_lp(out, m, s, inst);
    const std::string text = out.str();
    CHECK(text.find("Maximize") != std::string::npos);
    CHECK(text.find("x_0_1") != std::string::npos);
    CHECK(text.find("cap_j_1:") != std::string::npos);
    CHECK(text.find("cap_i_0:") != std::string::npos);
    CHECK(text.find("cut_1_1:") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("solve is deterministic") {
    const Instance inst = generate_synthetic(40, 40, 3, WeightMode::uniform, GroupMode::singletons(), 3);
    const LpSolution a = solve_lp(inst, Objective::vom);
    const LpSolution b = solve_lp(inst, Objective::vom);
    CHECK(a.x == b.x);
    CHECK(a.cut_count == b.cut_count);
}
