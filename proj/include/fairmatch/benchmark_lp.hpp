#pragma once

#include "fairmatch/instance.hpp"
#include "fairmatch/simplex.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fairmatch {

/// Right-hand side used for the subset constraints sum_{j in S} x_ij <= cap(|S|).
enum class SubsetCap {
    asymptotic,     ///< 1 - e^{-s}, the large-T form used by the benchmark LP
    finite_horizon, ///< 1 - (1 - s/T)^T, exact probability that some j in S arrives
};

double subset_cap(SubsetCap kind, int size, int horizon);

struct LpOptions {
    /// Largest subset size for the cut family; nullopt = min(20, max_i |N_i|).
    std::optional<int> k_cap;
    SubsetCap cap = SubsetCap::asymptotic;
    /// Exclude agents with N_i = {} from the lambda rows (otherwise IFM is 0).
    bool drop_isolated = true;
    int max_rounds = 1000;
    std::string backend = "dense-simplex";
};

/// Benchmark LP before cuts: one variable per edge (index = edge index),
/// plus lambda (index num_edges) for IFM and GFM.
struct LpModel {
    Objective objective = Objective::ifm;
    int num_edges = 0;
    bool has_lambda = false;
    int k_cap = 1;
    SubsetCap cap = SubsetCap::asymptotic;
    int horizon = 1;
    LpProblem problem;
    int online_rows = 0;
    int offline_rows = 0;
    int link_rows = 0;
    std::vector<std::string> warnings;

    int lambda_index() const { return num_edges; }
};

/// A violated subset constraint: agent i, the subset (edge indices) and its cap.
struct SubsetCut {
    int agent = 0;
    std::vector<int> edges;
    double rhs = 0.0;
    double violation = 0.0;
};

struct LpSolution {
    Objective objective = Objective::ifm;
    std::vector<double> x;          ///< per edge
    std::vector<double> agent_mass; ///< x_i = sum_{j ~ i} x_ij
    double value = 0.0;             ///< LP optimum (tau for IFM)
    int cut_count = 0;
    int rounds = 0;
    long pivots = 0;
    std::string status = "optimal";
    std::string backend;
    std::vector<SubsetCut> cuts;
};

struct FeasibilityReport {
    double online_capacity = 0.0;  ///< max over j of sum_i x_ij - 1
    double offline_capacity = 0.0; ///< max over i of x_i - 1
    double subset = 0.0;           ///< max over i, |S| <= K of sum_S x_ij - cap(|S|)
    double bounds = 0.0;           ///< max violation of 0 <= x_ij <= 1

    double worst() const;
};

int default_k_cap(const Instance& instance);

LpModel build_lp(const Instance& instance, Objective objective, const LpOptions& options = {});

/// Exact separation of the subset family via sorted prefix sums.
std::vector<SubsetCut> separate(std::span<const double> x, const Instance& instance, int k_cap,
                                SubsetCap cap = SubsetCap::asymptotic, double tolerance = 1e-9);

/// Cutting-plane loop: solve the relaxation, add violated subset cuts,
/// repeat until separation comes back empty.
LpSolution solve(const LpModel& model, const Instance& instance, const LpOptions& options = {});

/// build_lp followed by solve.
LpSolution solve_lp(const Instance& instance, Objective objective, const LpOptions& options = {});

/// Scale every agent with x_i > tau down to tau. Preserves all constraints.
LpSolution normalize_ifm(const LpSolution& solution, const Instance& instance);

FeasibilityReport check_feasibility(std::span<const double> x, const Instance& instance, int k_cap,
                                    SubsetCap cap = SubsetCap::asymptotic);

std::vector<double> agent_mass(std::span<const double> x, const Instance& instance);

/// Objective of x under the given kind (ignores any lambda variable).
double evaluate_objective(std::span<const double> x, const Instance& instance, Objective objective,
                          bool drop_isolated = true);

/// Write the model with all installed cuts in CPLEX LP text format.
void export_lp(std::ostream& out, const LpModel& model, const LpSolution& solution,
               const Instance& instance);

} // namespace fairmatch
