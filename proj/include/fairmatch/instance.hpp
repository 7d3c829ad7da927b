#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairmatch {

/// Objective maximized by the benchmark LP and reported by the harness.
enum class Objective {
    ifm, ///< individual fairness: min_i E[Z_i]
    gfm, ///< group fairness: min_G mean_{i in G} E[Z_i]
    vom, ///< vertex-weighted: sum_i w_i E[Z_i]
};

std::string_view to_string(Objective o) noexcept;
Objective parse_objective(std::string_view text);

struct Edge {
    int offline = 0;
    int online = 0;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// One endpoint of an edge as seen from the other side, plus the edge index.
struct Incidence {
    int agent = 0; ///< offline agent id or online type id, depending on the side
    int edge = 0;  ///< index into Instance::edges()
};

/// KIID online matching instance: bipartite graph, offline weights and
/// groups, arrival rates r_j and horizon T.
///
/// Immutable after construction. Edges are sorted by (offline, online) and
/// duplicates collapsed; edges with out-of-range endpoints are kept in
/// edges() so that validate() can report them, but never indexed.
class Instance {
public:
    Instance() = default;
    Instance(std::vector<double> weights, std::vector<double> rates, std::vector<Edge> edges,
             std::vector<std::vector<int>> groups, int horizon);

    int num_offline() const noexcept { return static_cast<int>(weights_.size()); }
    int num_online() const noexcept { return static_cast<int>(rates_.size()); }
    int horizon() const noexcept { return horizon_; }

    std::span<const double> weights() const noexcept { return weights_; }
    std::span<const double> rates() const noexcept { return rates_; }
    std::span<const Edge> edges() const noexcept { return edges_; }
    const std::vector<std::vector<int>>& groups() const noexcept { return groups_; }

    double weight(int i) const { return weights_[static_cast<std::size_t>(i)]; }
    double rate(int j) const { return rates_[static_cast<std::size_t>(j)]; }

    /// Offline neighbors of online type j, ascending by agent id.
    std::span<const Incidence> online_neighbors(int j) const;
    /// Online neighbors of offline agent i, ascending by type id.
    std::span<const Incidence> offline_neighbors(int i) const;

    int offline_degree(int i) const { return static_cast<int>(offline_neighbors(i).size()); }
    int max_offline_degree() const noexcept;
    bool is_isolated(int i) const { return offline_neighbors(i).empty(); }

    /// Groups containing agent i (indices into groups()).
    std::span<const int> groups_of(int i) const;

    friend bool operator==(const Instance& a, const Instance& b) {
        return a.weights_ == b.weights_ && a.rates_ == b.rates_ && a.edges_ == b.edges_ &&
               a.groups_ == b.groups_ && a.horizon_ == b.horizon_;
    }

private:
    std::vector<double> weights_;
    std::vector<double> rates_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> groups_;
    int horizon_ = 0;

    // CSR adjacency for both sides and agent -> group membership.
    std::vector<int> online_offsets_, offline_offsets_, group_offsets_;
    std::vector<Incidence> online_adj_, offline_adj_;
    std::vector<int> group_members_;
};

/// Sequence of arriving online types, one per round.
struct ArrivalSequence {
    std::vector<int> rounds;
    std::uint64_t rng_seed = 0;
};

struct Violation {
    std::string invariant;
    std::string detail;
};

inline constexpr double kRateTolerance = 1e-9;

/// Invariant violations; empty iff the instance is well formed.
std::vector<Violation> validate(const Instance& instance);

/// Non-fatal findings (currently: offline agents without neighbors).
std::vector<std::string> lint(const Instance& instance);

bool is_canonical(const Instance& instance);

/// Split every online type with integral rate r_j into r_j unit-rate copies.
/// Throws DataError naming j and r_j for non-integral or non-positive rates.
Instance canonicalize(const Instance& instance);

/// T i.i.d. draws from {r_j / T}; a pure function of (instance, seed).
ArrivalSequence sample_arrivals(const Instance& instance, std::uint64_t seed);

enum class WeightMode { unit, uniform };

/// Group construction for generated instances: singletons (IFM as a special
/// case of GFM) or a uniformly random partition into `blocks` groups.
struct GroupMode {
    enum class Kind { singletons, partition } kind = Kind::singletons;
    int blocks = 1;

    static GroupMode singletons() { return {}; }
    static GroupMode partition(int k) { return {Kind::partition, k}; }
};

WeightMode parse_weight_mode(std::string_view text);
/// Accepts "singletons" or "partition:<k>".
GroupMode parse_group_mode(std::string_view text);

/// Random instance with |I| = n_offline, |J| = T unit-rate types and each
/// offline agent adjacent to exactly `degree` distinct uniformly chosen types.
Instance generate_synthetic(int n_offline, int horizon, int degree, WeightMode weight_mode,
                            GroupMode group_mode, std::uint64_t seed);

} // namespace fairmatch
