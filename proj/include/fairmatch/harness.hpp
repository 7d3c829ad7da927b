#pragma once

#include "fairmatch/attenuation.hpp"
#include "fairmatch/benchmark_lp.hpp"
#include "fairmatch/instance.hpp"
#include "fairmatch/policy.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fairmatch {

inline constexpr double kZ95 = 1.96;

struct TrialReport {
    std::string policy;
    Objective objective = Objective::ifm;
    long trials = 0;
    std::uint64_t master_seed = 0;
    std::vector<long> matches;   ///< per agent, over all trials
    std::vector<double> z;       ///< matches / trials
    std::vector<double> z_half;  ///< 1.96 * sqrt(z (1 - z) / trials)
    double objective_estimate = 0.0;
    double objective_half = 0.0;
    double lp_value = 0.0;
    std::optional<double> cr1; ///< min_i z_i / x_i* over agents with x_i* > 0
    double cr1_half = 0.0;
    int cr1_agent = -1;
    int cr1_excluded = 0;
    std::optional<double> cr2; ///< objective / LP*
    double cr2_half = 0.0;
    double mean_matched = 0.0; ///< average number of matched agents per trial
};

struct RunOptions {
    long trials = 100;
    std::uint64_t master_seed = 0;
    int threads = 1;
};

/// Seed of trial k; shared by every policy so all see the same arrivals.
std::uint64_t trial_seed(std::uint64_t master_seed, long k);

/// Run one policy against fixed inputs. `context.lp` supplies x_i* for CR1 and
/// `lp_value` the denominator of CR2 (ignored when <= 0).
TrialReport run_policy(const std::string& policy, const PolicyContext& context, double lp_value,
                       const RunOptions& options);

struct ExperimentConfig {
    std::vector<std::string> policies = {"samp-b"};
    Objective objective = Objective::ifm;
    RunOptions run;
    LpOptions lp;
    PlanOptions plan;
};

struct ExperimentResult {
    LpSolution lp;        ///< as solved
    LpSolution policy_lp; ///< what LP-based policies use (normalized for IFM)
    std::optional<AttenuationTable> table;
    std::vector<TrialReport> reports;
};

/// Solve the LP, plan attenuation if SAMP-AB is requested, run every policy on
/// common arrival sequences.
ExperimentResult run_experiment(const Instance& instance, const ExperimentConfig& config);

void write_report_json(std::ostream& out, const std::vector<TrialReport>& reports, const std::string& instance_hash);
void write_report_csv(std::ostream& out, const std::vector<TrialReport>& reports, const std::string& instance_hash);
std::vector<TrialReport> read_report_json(std::istream& in);
/// Human-readable summary table.
void print_report(std::ostream& out, const std::vector<TrialReport>& reports);

/// Sweep over generated or loaded instances; see README for the config keys.
struct SweepOutput {
    std::string rows_csv;    ///< one row per (cell, instance, policy)
    std::string summary_csv; ///< one row per (cell, policy), means over instances
    std::string config_hash;
};

SweepOutput sweep(const std::string& config_json);

} // namespace fairmatch
