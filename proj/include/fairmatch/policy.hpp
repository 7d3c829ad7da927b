#pragma once

#include "fairmatch/benchmark_lp.hpp"
#include "fairmatch/instance.hpp"
#include "fairmatch/rng.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace fairmatch {

struct AttenuationTable;

inline constexpr int kReject = -1;

enum class AgentStatus : std::uint8_t { active, matched, muted };

struct MatchRecord {
    int round = 0; ///< 1-based
    int type = 0;
    int agent = kReject;

    friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

/// Trial-local state. Status only moves away from active.
struct MatchState {
    std::vector<AgentStatus> status;
    std::vector<MatchRecord> record;
    std::vector<int> group_matched; ///< matched members per group
    int round = 0;                  ///< rounds completed so far
    int matched = 0;

    MatchState() = default;
    explicit MatchState(const Instance& instance);

    bool is_active(int i) const { return status[static_cast<std::size_t>(i)] == AgentStatus::active; }
    bool is_matched(int i) const { return status[static_cast<std::size_t>(i)] == AgentStatus::matched; }
    int active_count() const;
};

/// Shared read-only inputs for policies. Pointers must outlive the policy.
struct PolicyContext {
    const Instance* instance = nullptr;
    const LpSolution* lp = nullptr;
    const AttenuationTable* table = nullptr;
    Objective objective = Objective::ifm;
};

/// Online policy. One object per trial; `rng` is the trial's policy stream.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    /// Called once before round 1.
    virtual void init(MatchState& /*state*/, Rng& /*rng*/) {}
    /// Called at the start of every round, before the arrival is revealed.
    virtual void begin_round(MatchState& /*state*/, Rng& /*rng*/) {}
    /// Pick an active neighbor of j, or kReject. Must not modify state.
    virtual int choose(const MatchState& state, int type, Rng& rng) = 0;
};

struct PolicyInfo {
    std::string name;
    bool needs_lp = false;
    bool needs_table = false;
    std::function<std::unique_ptr<Policy>(const PolicyContext&)> factory;
};

/// Register (or replace) a policy factory under info.name.
void register_policy(PolicyInfo info);
const PolicyInfo& policy_info(const std::string& name);
std::vector<std::string> policy_names();
/// Checks the context against the policy's requirements; throws UsageError.
std::unique_ptr<Policy> make_policy(const std::string& name, const PolicyContext& context);

/// Boosted sampling distribution of SAMP-B over the active neighbors of j:
/// pairs (agent, probability). Empty when no active neighbor has positive mass.
std::vector<std::pair<int, double>> boosted_distribution(const Instance& instance, const LpSolution& lp,
                                                         const MatchState& state, int type);

/// Source of the two candidates MGS-lite tries in order (kReject = no candidate).
class CandidatePairGenerator {
public:
    virtual ~CandidatePairGenerator() = default;
    virtual std::pair<int, int> draw(const Instance& instance, const LpSolution& lp, int type, Rng& rng) = 0;
};

/// Two independent draws from {x_ij : i ~ j}; leftover mass 1 - sum means no candidate.
class IndependentPairGenerator final : public CandidatePairGenerator {
public:
    std::pair<int, int> draw(const Instance& instance, const LpSolution& lp, int type, Rng& rng) override;
};

/// rank[i] for RANKING: a uniform permutation drawn from rng.
std::vector<int> ranking_permutation(int n, Rng& rng);

std::unique_ptr<Policy> make_mgs_lite(const PolicyContext& context,
                                      std::unique_ptr<CandidatePairGenerator> generator);

/// Advance one round: attenuation hook, decision, bookkeeping. Returns the agent or kReject.
int step(Policy& policy, MatchState& state, const Instance& instance, int type, Rng& rng);

/// Seeds for one trial: the arrival sequence and the policy coins use separate
/// streams so different policies see the same arrivals.
std::uint64_t arrival_seed(std::uint64_t trial_seed);
std::uint64_t policy_seed(std::uint64_t trial_seed);

MatchState run_trial(const Instance& instance, Policy& policy, std::uint64_t trial_seed);
MatchState run_trial(const Instance& instance, Policy& policy, const ArrivalSequence& arrivals, Rng& rng);

} // namespace fairmatch
