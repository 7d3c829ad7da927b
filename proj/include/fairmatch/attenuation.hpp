#pragma once

#include "fairmatch/benchmark_lp.hpp"
#include "fairmatch/instance.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fairmatch {

/// beta_{i,t} for SAMP-AB, rounds t = 1..T, plus the alpha estimates behind it.
struct AttenuationTable {
    int num_offline = 0;
    int horizon = 0;
    int sim_count = 0;
    int stride = 1;
    std::uint64_t seed = 0;
    std::string instance_hash;
    std::string lp_hash;
    std::vector<double> beta;  ///< row-major, beta[i * T + (t - 1)]
    std::vector<double> alpha; ///< same layout; alpha_{i,1} = 1

    double beta_at(int i, int t) const {
        return beta[static_cast<std::size_t>(i) * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(t - 1)];
    }
    double alpha_at(int i, int t) const {
        return alpha[static_cast<std::size_t>(i) * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(t - 1)];
    }

    /// All-ones table (SAMP-AB then coincides with SAMP-B).
    static AttenuationTable identity(int num_offline, int horizon);
};

struct PlanOptions {
    int sim_count = 100;
    std::uint64_t seed = 0;
    /// Recompute beta every `stride` rounds; columns in between repeat the last one.
    int stride = 1;
};

/// (1 - 1/T)^{t-1} for t = 1..T.
std::vector<double> target_curve(int horizon);

AttenuationTable plan(const Instance& instance, const LpSolution& lp, const PlanOptions& options = {});

void write_table(std::ostream& out, const AttenuationTable& table);
AttenuationTable read_table(std::istream& in);

} // namespace fairmatch
