#include "fairmatch/instance.hpp"

#include "fairmatch/error.hpp"
#include "fairmatch/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fairmatch {

std::string_view to_string(Objective o) noexcept {
    switch (o) {
    case Objective::ifm: return "ifm";
    case Objective::gfm: return "gfm";
    case Objective::vom: return "vom";
    }
    return "?";
}

Objective parse_objective(std::string_view text) {
    if (text == "ifm" || text == "IFM") return Objective::ifm;
    if (text == "gfm" || text == "GFM") return Objective::gfm;
    if (text == "vom" || text == "VOM") return Objective::vom;
    throw UsageError("unknown objective '" + std::string(text) + "' (expected ifm, gfm or vom)");
}

namespace {

// Builds CSR offsets for `count` buckets given the bucket of each item.
template <class KeyFn>
std::vector<int> bucket_offsets(std::size_t count, std::size_t items, KeyFn key) {
    std::vector<int> offsets(count + 1, 0);
    for (std::size_t k = 0; k < items; ++k) {
        ++offsets[static_cast<std::size_t>(key(k)) + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    return offsets;
}

bool in_range(const Edge& e, int n_offline, int n_online) {
    return e.offline >= 0 && e.offline < n_offline && e.online >= 0 && e.online < n_online;
}

} // namespace

Instance::Instance(std::vector<double> weights, std::vector<double> rates, std::vector<Edge> edges,
                   std::vector<std::vector<int>> groups, int horizon)
    : weights_(std::move(weights)), rates_(std::move(rates)), edges_(std::move(edges)),
      groups_(std::move(groups)), horizon_(horizon) {
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    const int n_i = num_offline();
    const int n_j = num_online();
    std::vector<int> valid;
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
        if (in_range(edges_[static_cast<std::size_t>(e)], n_i, n_j)) valid.push_back(e);
    }

    // Edges are sorted by (offline, online), so filling in order keeps both
    // adjacency lists sorted by the opposite endpoint.
    offline_offsets_ = bucket_offsets(static_cast<std::size_t>(n_i), valid.size(),
                                      [&](std::size_t k) { return edges_[static_cast<std::size_t>(valid[k])].offline; });
    online_offsets_ = bucket_offsets(static_cast<std::size_t>(n_j), valid.size(),
                                     [&](std::size_t k) { return edges_[static_cast<std::size_t>(valid[k])].online; });
    offline_adj_.resize(valid.size());
    online_adj_.resize(valid.size());
    std::vector<int> fill_i(offline_offsets_.begin(), offline_offsets_.end() - 1);
    std::vector<int> fill_j(online_offsets_.begin(), online_offsets_.end() - 1);
    for (int e : valid) {
        const Edge& edge = edges_[static_cast<std::size_t>(e)];
        offline_adj_[static_cast<std::size_t>(fill_i[static_cast<std::size_t>(edge.offline)]++)] = {edge.online, e};
        online_adj_[static_cast<std::size_t>(fill_j[static_cast<std::size_t>(edge.online)]++)] = {edge.offline, e};
    }

    std::vector<std::pair<int, int>> membership;
    for (int g = 0; g < static_cast<int>(groups_.size()); ++g) {
        for (int i : groups_[static_cast<std::size_t>(g)]) {
            if (i >= 0 && i < n_i) membership.emplace_back(i, g);
        }
    }
    std::sort(membership.begin(), membership.end());
    membership.erase(std::unique(membership.begin(), membership.end()), membership.end());
    group_offsets_ = bucket_offsets(static_cast<std::size_t>(n_i), membership.size(),
                                    [&](std::size_t k) { return membership[k].first; });
    group_members_.reserve(membership.size());
    for (const auto& [i, g] : membership) group_members_.push_back(g);
}

std::span<const Incidence> Instance::online_neighbors(int j) const {
    const auto b = static_cast<std::size_t>(online_offsets_[static_cast<std::size_t>(j)]);
    const auto e = static_cast<std::size_t>(online_offsets_[static_cast<std::size_t>(j) + 1]);
    return std::span<const Incidence>(online_adj_).subspan(b, e - b);
}

std::span<const Incidence> Instance::offline_neighbors(int i) const {
    const auto b = static_cast<std::size_t>(offline_offsets_[static_cast<std::size_t>(i)]);
    const auto e = static_cast<std::size_t>(offline_offsets_[static_cast<std::size_t>(i) + 1]);
    return std::span<const Incidence>(offline_adj_).subspan(b, e - b);
}

std::span<const int> Instance::groups_of(int i) const {
    const auto b = static_cast<std::size_t>(group_offsets_[static_cast<std::size_t>(i)]);
    const auto e = static_cast<std::size_t>(group_offsets_[static_cast<std::size_t>(i) + 1]);
    return std::span<const int>(group_members_).subspan(b, e - b);
}

int Instance::max_offline_degree() const noexcept {
    int best = 0;
    for (int i = 0; i < num_offline(); ++i) best = std::max(best, offline_degree(i));
    return best;
}

std::vector<Violation> validate(const Instance& instance) {
    std::vector<Violation> out;
    const int n_i = instance.num_offline();
    const int n_j = instance.num_online();

    const auto& edges = instance.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (!in_range(edges[e], n_i, n_j)) {
            std::ostringstream msg;
            msg << "edge " << e << " = (i=" << edges[e].offline << ", j=" << edges[e].online
                << ") with |I|=" << n_i << ", |J|=" << n_j;
            out.push_back({"edge-endpoint-exists", msg.str()});
        }
    }

    if (instance.horizon() < 1) {
        out.push_back({"horizon-positive", "T=" + std::to_string(instance.horizon())});
    }

    double rate_sum = 0.0;
    for (int j = 0; j < n_j; ++j) {
        const double r = instance.rate(j);
        if (!(r >= 0.0) || !std::isfinite(r)) {
            out.push_back({"rate-nonnegative", "r_" + std::to_string(j) + "=" + std::to_string(r)});
        }
        rate_sum += r;
    }
    if (!(std::abs(rate_sum - instance.horizon()) <= kRateTolerance)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "sum_j r_j = " << rate_sum << " but T = " << instance.horizon();
        out.push_back({"rate-sum-equals-horizon", msg.str()});
    }

    for (int i = 0; i < n_i; ++i) {
        const double w = instance.weight(i);
        if (!(w >= 0.0) || !std::isfinite(w)) {
            out.push_back({"weight-nonnegative", "w_" + std::to_string(i) + "=" + std::to_string(w)});
        }
    }

    const auto& groups = instance.groups();
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) {
            out.push_back({"group-nonempty", "group " + std::to_string(g) + " is empty"});
        }
        for (int i : groups[g]) {
            if (i < 0 || i >= n_i) {
                out.push_back({"group-subset-of-offline",
                               "group " + std::to_string(g) + " contains agent " + std::to_string(i)});
            }
        }
    }
    return out;
}

std::vector<std::string> lint(const Instance& instance) {
    std::vector<std::string> out;
    for (int i = 0; i < instance.num_offline(); ++i) {
        if (instance.is_isolated(i)) {
            out.push_back("offline agent " + std::to_string(i) + " has no neighbors and can never be matched");
        }
    }
    return out;
}

bool is_canonical(const Instance& instance) {
    if (instance.num_online() != instance.horizon()) return false;
    return std::all_of(instance.rates().begin(), instance.rates().end(),
                       [](double r) { return std::abs(r - 1.0) <= kRateTolerance; });
}

Instance canonicalize(const Instance& instance) {
    std::vector<int> copies(static_cast<std::size_t>(instance.num_online()));
    for (int j = 0; j < instance.num_online(); ++j) {
        const double r = instance.rate(j);
        const double rounded = std::round(r);
        if (!(std::abs(r - rounded) <= kRateTolerance) || rounded < 1.0) {
            std::ostringstream msg;
            msg << "cannot canonicalize: online type " << j << " has rate r_j=" << r
                << " (expected a positive integer)";
            throw DataError(msg.str());
        }
        copies[static_cast<std::size_t>(j)] = static_cast<int>(rounded);
    }

    // first[j] = id of the first copy of type j
    std::vector<int> first(copies.size() + 1, 0);
    std::partial_sum(copies.begin(), copies.end(), first.begin() + 1);
    const int total = first.back();

    std::vector<Edge> edges;
    for (const Edge& e : instance.edges()) {
        if (e.online < 0 || e.online >= instance.num_online()) continue;
        for (int c = 0; c < copies[static_cast<std::size_t>(e.online)]; ++c) {
            edges.push_back({e.offline, first[static_cast<std::size_t>(e.online)] + c});
        }
    }
    std::vector<double> weights(instance.weights().begin(), instance.weights().end());
    return Instance(std::move(weights), std::vector<double>(static_cast<std::size_t>(total), 1.0),
                    std::move(edges), instance.groups(), total);
}

ArrivalSequence sample_arrivals(const Instance& instance, std::uint64_t seed) {
    ArrivalSequence seq;
    seq.rng_seed = seed;
    const int horizon = instance.horizon();
    if (horizon <= 0 || instance.num_online() == 0) return seq;

    std::vector<double> cumulative(static_cast<std::size_t>(instance.num_online()));
    double acc = 0.0;
    for (int j = 0; j < instance.num_online(); ++j) {
        acc += instance.rate(j);
        cumulative[static_cast<std::size_t>(j)] = acc;
    }

    Rng rng(seed);
    seq.rounds.reserve(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
        const double u = rng.uniform() * acc;
        // upper_bound never lands on a zero-rate type: its cumulative value equals its predecessor's.
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        seq.rounds.push_back(static_cast<int>(it - cumulative.begin()));
    }
    return seq;
}

WeightMode parse_weight_mode(std::string_view text) {
    if (text == "unit") return WeightMode::unit;
    if (text == "uniform") return WeightMode::uniform;
    throw UsageError("unknown weight mode '" + std::string(text) + "' (expected unit or uniform)");
}

GroupMode parse_group_mode(std::string_view text) {
    if (text == "singletons") return GroupMode::singletons();
    constexpr std::string_view prefix = "partition:";
    if (text.substr(0, prefix.size()) == prefix) {
        const std::string digits(text.substr(prefix.size()));
        try {
            std::size_t used = 0;
            const int k = std::stoi(digits, &used);
            if (used == digits.size() && k >= 1) return GroupMode::partition(k);
        } catch (const std::exception&) {
        }
    }
    throw UsageError("unknown group mode '" + std::string(text) + "' (expected singletons or partition:<k>)");
}

Instance generate_synthetic(int n_offline, int horizon, int degree, WeightMode weight_mode,
                            GroupMode group_mode, std::uint64_t seed) {
    if (n_offline < 1 || horizon < 1) {
        throw UsageError("generate_synthetic: n_offline and T must be at least 1");
    }
    if (degree < 0 || degree > horizon) {
        throw UsageError("generate_synthetic: degree " + std::to_string(degree) + " must lie in [0, T=" +
                         std::to_string(horizon) + "]");
    }
    if (group_mode.kind == GroupMode::Kind::partition &&
        (group_mode.blocks < 1 || group_mode.blocks > n_offline)) {
        throw UsageError("generate_synthetic: partition into " + std::to_string(group_mode.blocks) +
                         " groups needs 1 <= k <= n_offline");
    }

    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::instance)}));
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n_offline) * static_cast<std::size_t>(degree));
    std::vector<int> pool(static_cast<std::size_t>(horizon));
    for (int i = 0; i < n_offline; ++i) {
        std::iota(pool.begin(), pool.end(), 0);
        // Partial Fisher-Yates: the first `degree` slots are a uniform sample.
        for (int k = 0; k < degree; ++k) {
            const auto pick = static_cast<std::size_t>(k) +
                              static_cast<std::size_t>(rng.index(static_cast<std::uint64_t>(horizon - k)));
            std::swap(pool[static_cast<std::size_t>(k)], pool[pick]);
            edges.push_back({i, pool[static_cast<std::size_t>(k)]});
        }
    }

    std::vector<double> weights(static_cast<std::size_t>(n_offline), 1.0);
    if (weight_mode == WeightMode::uniform) {
        Rng wrng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::weights)}));
        for (double& w : weights) w = wrng.uniform();
    }

    std::vector<std::vector<int>> groups;
    if (group_mode.kind == GroupMode::Kind::singletons) {
        for (int i = 0; i < n_offline; ++i) groups.push_back({i});
    } else {
        std::vector<int> order(static_cast<std::size_t>(n_offline));
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t k = order.size(); k > 1; --k) {
            std::swap(order[k - 1], order[static_cast<std::size_t>(rng.index(k))]);
        }
        groups.assign(static_cast<std::size_t>(group_mode.blocks), {});
        for (std::size_t k = 0; k < order.size(); ++k) {
            groups[k % groups.size()].push_back(order[k]);
        }
        for (auto& g : groups) std::sort(g.begin(), g.end());
    }

    return Instance(std::move(weights), std::vector<double>(static_cast<std::size_t>(horizon), 1.0),
                    std::move(edges), std::move(groups), horizon);
}

} // namespace fairmatch
