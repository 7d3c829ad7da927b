#pragma once

#include "fairmatch/benchmark_lp.hpp"
#include "fairmatch/instance.hpp"

#include <functional>
#include <vector>

namespace fairmatch {

/// Worst-case split of LP mass tau across an agent's neighbors: pieces
/// 1-e^{-1}, e^{-1}-e^{-2}, ... followed by the residual. Pieces are added
/// until the residual drops below 1e-12.
std::vector<double> minimizer_set(double tau);

/// Same construction capped at three pieces, as used inside F(x, kappa).
std::vector<double> minimizer_set_capped(double tau);

/// Lower bound on E[Z_i] / tau for SAMP-B.
double sampb_bound(double tau);

/// f(p, x) = x / (x + (1 - x) p).
double boost_factor(double p, double x);

/// F(x, kappa); divide by x for the ratio bound of SAMP-AB.
double sampab_bound(double x_star, double kappa);

struct BoundEvaluation {
    double x = 0.0;
    double kappa = 0.0;
    double value = 0.0; ///< ratio at (x, kappa)
    std::vector<double> set;
    long evaluations = 0;
};

struct GridOptions {
    int x_points = 400;
    int kappa_points = 400;
    bool refine = true;
};

/// Minimize F(x, kappa) / x over (0,1] x [0,1] on a grid, then refine locally.
BoundEvaluation minimize_sampab_ratio(const GridOptions& options = {});

/// Adaptive Simpson quadrature with an absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b, double tolerance = 1e-10);

/// Discretized minimum of sum_k ln(1 + x_k (e^tau - 1)) over x >= 0 with
/// sum_k x_k = tau and every s-subset summing to at most 1 - e^{-s}.
/// Values live on a grid of `step`; at most `max_parts` pieces.
double allocation_minimum(double tau, double step = 1e-3, int max_parts = 40);

/// One shared agent i* = 0 plus n-1 private agents per online type; T = n.
/// w_{i*} = 1, all other weights (1/n)^3.
Instance make_example1(int n);
/// x_ij = 1/n on every edge of make_example1(n), with agent masses and VOM value.
LpSolution example1_reference_solution(const Instance& example1);

/// |I| = |J| = T = n; type 0 is adjacent to every agent, type j >= 1 only to agent j.
Instance make_example_worst(int n);

/// Expected offline optimum E_S[OPT(S)] by enumerating every arrival sequence.
/// Requires |J|^T <= 1e6 and |I| <= 64.
double clairvoyant_oracle(const Instance& instance, Objective objective, bool drop_isolated = true);

} // namespace fairmatch
