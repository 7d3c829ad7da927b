#include "fairmatch/policy.hpp"

#include "fairmatch/attenuation.hpp"
#include "fairmatch/error.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

namespace fairmatch {

MatchState::MatchState(const Instance& instance)
    : status(static_cast<std::size_t>(instance.num_offline()), AgentStatus::active),
      group_matched(instance.groups().size(), 0) {
    record.reserve(static_cast<std::size_t>(std::max(instance.horizon(), 0)));
}

int MatchState::active_count() const {
    return static_cast<int>(std::count(status.begin(), status.end(), AgentStatus::active));
}

std::vector<std::pair<int, double>> boosted_distribution(const Instance& instance, const LpSolution& lp,
                                                         const MatchState& state, int type) {
    std::vector<std::pair<int, double>> out;
    double total = 0.0;
    for (const Incidence& n : instance.online_neighbors(type)) {
        if (!state.is_active(n.agent)) continue;
        const double x = lp.x[static_cast<std::size_t>(n.edge)];
        if (x <= 0.0) continue;
        out.emplace_back(n.agent, x);
        total += x;
    }
    if (total <= 0.0) return {};
    for (auto& [agent, p] : out) p /= total;
    return out;
}

namespace {

// Weighted draw over the active neighbors of j; the edge masses are not renormalized
// explicitly, the uniform is scaled instead.
int sample_boosted(const Instance& instance, const LpSolution& lp, const MatchState& state, int type, Rng& rng) {
    const auto nbrs = instance.online_neighbors(type);
    double total = 0.0;
    for (const Incidence& n : nbrs) {
        if (state.is_active(n.agent)) total += lp.x[static_cast<std::size_t>(n.edge)];
    }
    if (total <= 0.0) return kReject;
    const double u = rng.uniform() * total;
    double acc = 0.0;
    int last = kReject;
    for (const Incidence& n : nbrs) {
        if (!state.is_active(n.agent)) continue;
        const double x = lp.x[static_cast<std::size_t>(n.edge)];
        if (x <= 0.0) continue;
        acc += x;
        last = n.agent;
        if (u < acc) return n.agent;
    }
    return last; // rounding left u just above the running sum
}

template <class Key>
int pick_best(const Instance& instance, const MatchState& state, int type, Rng& rng, Key key) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> ties;
    for (const Incidence& n : instance.online_neighbors(type)) {
        if (!state.is_active(n.agent)) continue;
        const double k = key(n.agent);
        if (ties.empty() || k > best) {
            best = k;
            ties.assign(1, n.agent);
        } else if (k == best) {
            ties.push_back(n.agent);
        }
    }
    if (ties.empty()) return kReject;
    if (ties.size() == 1) return ties.front();
    return ties[static_cast<std::size_t>(rng.index(ties.size()))];
}

class SampB final : public Policy {
public:
    explicit SampB(const PolicyContext& ctx) : ctx_(ctx) {}
    std::string name() const override { return "samp-b"; }
    int choose(const MatchState& state, int type, Rng& rng) override {
        return sample_boosted(*ctx_.instance, *ctx_.lp, state, type, rng);
    }

private:
    PolicyContext ctx_;
};

class SampAB final : public Policy {
public:
    explicit SampAB(const PolicyContext& ctx) : ctx_(ctx) {
        if (ctx.table->horizon != ctx.instance->horizon() || ctx.table->num_offline != ctx.instance->num_offline()) {
            throw UsageError("attenuation table is " + std::to_string(ctx.table->num_offline) + " x " +
                             std::to_string(ctx.table->horizon) + " but the instance has |I| = " +
                             std::to_string(ctx.instance->num_offline()) + ", T = " +
                             std::to_string(ctx.instance->horizon()));
        }
    }
    std::string name() const override { return "samp-ab"; }

    void begin_round(MatchState& state, Rng& rng) override {
        const int t = state.round + 1;
        const AttenuationTable& table = *ctx_.table;
        for (std::size_t i = 0; i < state.status.size(); ++i) {
            if (state.status[i] != AgentStatus::active) continue;
            const double beta = table.beta_at(static_cast<int>(i), t);
            if (beta >= 1.0) continue;
            if (!rng.bernoulli(beta)) state.status[i] = AgentStatus::muted;
        }
    }

    int choose(const MatchState& state, int type, Rng& rng) override {
        return sample_boosted(*ctx_.instance, *ctx_.lp, state, type, rng);
    }

private:
    PolicyContext ctx_;
};

class Greedy final : public Policy {
public:
    explicit Greedy(const PolicyContext& ctx) : ctx_(ctx) {
        if (ctx.objective == Objective::gfm && ctx.instance->groups().empty()) {
            throw UsageError("greedy with the GFM objective needs groups");
        }
    }
    std::string name() const override { return "greedy"; }

    int choose(const MatchState& state, int type, Rng& rng) override {
        const Instance& inst = *ctx_.instance;
        switch (ctx_.objective) {
        case Objective::ifm:
            return pick_best(inst, state, type, rng, [](int) { return 0.0; });
        case Objective::vom:
            return pick_best(inst, state, type, rng, [&](int i) { return inst.weight(i); });
        case Objective::gfm:
            // Lowest matched fraction among the agent's groups; agents outside every group go last.
            return pick_best(inst, state, type, rng, [&](int i) {
                double worst = std::numeric_limits<double>::infinity();
                for (int g : inst.groups_of(i)) {
                    const double size = static_cast<double>(inst.groups()[static_cast<std::size_t>(g)].size());
                    worst = std::min(worst, state.group_matched[static_cast<std::size_t>(g)] / size);
                }
                return -worst;
            });
        }
        return kReject;
    }

private:
    PolicyContext ctx_;
};

class Ranking final : public Policy {
public:
    explicit Ranking(const PolicyContext& ctx) : ctx_(ctx) {}
    std::string name() const override { return "ranking"; }

    void init(MatchState& state, Rng& rng) override {
        rank_ = ranking_permutation(static_cast<int>(state.status.size()), rng);
    }

    int choose(const MatchState& state, int type, Rng&) override {
        int best = kReject;
        for (const Incidence& n : ctx_.instance->online_neighbors(type)) {
            if (!state.is_active(n.agent)) continue;
            if (best == kReject || rank_[static_cast<std::size_t>(n.agent)] < rank_[static_cast<std::size_t>(best)]) {
                best = n.agent;
            }
        }
        return best;
    }

private:
    PolicyContext ctx_;
    std::vector<int> rank_;
};

class MgsLite final : public Policy {
public:
    MgsLite(const PolicyContext& ctx, std::unique_ptr<CandidatePairGenerator> gen)
        : ctx_(ctx), gen_(std::move(gen)) {}
    std::string name() const override { return "mgs-lite"; }

    int choose(const MatchState& state, int type, Rng& rng) override {
        const auto [first, second] = gen_->draw(*ctx_.instance, *ctx_.lp, type, rng);
        if (first != kReject && state.is_active(first)) return first;
        if (second != kReject && state.is_active(second)) return second;
        return kReject;
    }

private:
    PolicyContext ctx_;
    std::unique_ptr<CandidatePairGenerator> gen_;
};

struct Registry {
    std::mutex mutex;
    std::map<std::string, PolicyInfo> entries;

    Registry() {
        add({"samp-b", true, false, [](const PolicyContext& c) { return std::make_unique<SampB>(c); }});
        add({"samp-ab", true, true, [](const PolicyContext& c) { return std::make_unique<SampAB>(c); }});
        add({"greedy", false, false, [](const PolicyContext& c) { return std::make_unique<Greedy>(c); }});
        add({"ranking", false, false, [](const PolicyContext& c) { return std::make_unique<Ranking>(c); }});
        add({"mgs-lite", true, false, [](const PolicyContext& c) {
                 return make_mgs_lite(c, std::make_unique<IndependentPairGenerator>());
             }});
    }
    void add(PolicyInfo info) { entries[info.name] = std::move(info); }
};

Registry& registry() {
    static Registry r;
    return r;
}

} // namespace

std::vector<int> ranking_permutation(int n, Rng& rng) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = order.size(); k > 1; --k) {
        std::swap(order[k - 1], order[static_cast<std::size_t>(rng.index(k))]);
    }
    std::vector<int> rank(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos);
    return rank;
}

std::pair<int, int> IndependentPairGenerator::draw(const Instance& instance, const LpSolution& lp, int type,
                                                   Rng& rng) {
    const auto nbrs = instance.online_neighbors(type);
    auto one = [&]() {
        const double u = rng.uniform();
        double acc = 0.0;
        for (const Incidence& n : nbrs) {
            acc += lp.x[static_cast<std::size_t>(n.edge)];
            if (u < acc) return n.agent;
        }
        return kReject;
    };
    const int a = one();
    const int b = one();
    return {a, b};
}

std::unique_ptr<Policy> make_mgs_lite(const PolicyContext& context,
                                      std::unique_ptr<CandidatePairGenerator> generator) {
    return std::make_unique<MgsLite>(context, std::move(generator));
}

void register_policy(PolicyInfo info) {
    if (info.name.empty() || !info.factory) throw UsageError("policy registration needs a name and a factory");
    Registry& r = registry();
    std::lock_guard lock(r.mutex);
    r.add(std::move(info));
}

const PolicyInfo& policy_info(const std::string& name) {
    Registry& r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.entries.find(name);
    if (it == r.entries.end()) {
        std::string known;
        for (const auto& [k, v] : r.entries) known += (known.empty() ? "" : ", ") + k;
        throw UsageError("unknown policy '" + name + "' (known: " + known + ")");
    }
    return it->second;
}

std::vector<std::string> policy_names() {
    Registry& r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> names;
    for (const auto& [k, v] : r.entries) names.push_back(k);
    return names;
}

std::unique_ptr<Policy> make_policy(const std::string& name, const PolicyContext& context) {
    const PolicyInfo& info = policy_info(name);
    if (context.instance == nullptr) throw UsageError("policy '" + name + "' needs an instance");
    if (info.needs_lp) {
        if (context.lp == nullptr) throw UsageError("policy '" + name + "' needs an LP solution");
        if (context.lp->x.size() != context.instance->edges().size()) {
            throw UsageError("LP solution has " + std::to_string(context.lp->x.size()) + " edge values, instance has " +
                             std::to_string(context.instance->edges().size()) + " edges");
        }
    }
    if (info.needs_table && context.table == nullptr) {
        throw UsageError("policy '" + name + "' needs an attenuation table");
    }
    return info.factory(context);
}

int step(Policy& policy, MatchState& state, const Instance& instance, int type, Rng& rng) {
    if (state.round >= instance.horizon()) {
        throw InternalError("step called after the last round (T = " + std::to_string(instance.horizon()) + ")");
    }
    policy.begin_round(state, rng);
    const int agent = policy.choose(state, type, rng);
    if (agent != kReject) {
        if (!state.is_active(agent)) {
            throw InternalError(policy.name() + " chose inactive agent " + std::to_string(agent));
        }
        state.status[static_cast<std::size_t>(agent)] = AgentStatus::matched;
        ++state.matched;
        for (int g : instance.groups_of(agent)) ++state.group_matched[static_cast<std::size_t>(g)];
    }
    ++state.round;
    state.record.push_back({state.round, type, agent});
    return agent;
}

std::uint64_t arrival_seed(std::uint64_t trial_seed) {
    return derive_seed(trial_seed, {static_cast<std::uint64_t>(Stream::arrivals)});
}

std::uint64_t policy_seed(std::uint64_t trial_seed) {
    return derive_seed(trial_seed, {static_cast<std::uint64_t>(Stream::policy)});
}

MatchState run_trial(const Instance& instance, Policy& policy, const ArrivalSequence& arrivals, Rng& rng) {
    MatchState state(instance);
    policy.init(state, rng);
    for (int type : arrivals.rounds) step(policy, state, instance, type, rng);
    return state;
}

MatchState run_trial(const Instance& instance, Policy& policy, std::uint64_t trial_seed) {
    const ArrivalSequence arrivals = sample_arrivals(instance, arrival_seed(trial_seed));
    Rng rng(policy_seed(trial_seed));
    return run_trial(instance, policy, arrivals, rng);
}

} // namespace fairmatch
