#pragma once

#include "fairmatch/instance.hpp"
#include "fairmatch/rng.hpp"

#include <cmath>
#include <cstdint>

namespace testing {

inline fairmatch::Instance complete(int n_offline, int n_online) {
    std::vector<fairmatch::Edge> edges;
    for (int i = 0; i < n_offline; ++i) {
        for (int j = 0; j < n_online; ++j) edges.push_back({i, j});
    }
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < n_offline; ++i) groups.push_back({i});
    return fairmatch::Instance(std::vector<double>(static_cast<std::size_t>(n_offline), 1.0),
                               std::vector<double>(static_cast<std::size_t>(n_online), 1.0), std::move(edges),
                               std::move(groups), n_online);
}

// I = {0, 1}, J = {0, 1}, E = {(0,0), (0,1), (1,1)}
inline fairmatch::Instance path() {
    return fairmatch::Instance({1.0, 1.0}, {1.0, 1.0}, {{0, 0}, {0, 1}, {1, 1}}, {{0}, {1}}, 2);
}

inline fairmatch::Instance single_edge(int horizon) {
    std::vector<fairmatch::Edge> edges{{0, 0}};
    return fairmatch::Instance({1.0}, std::vector<double>(static_cast<std::size_t>(horizon), 1.0), std::move(edges),
                               {{0}}, horizon);
}

inline double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }


// Canonical instance with |I| = n_offline, |J| = T, edges with probability 1/2,
// weights Uniform[0,1] and a random partition into at most two groups.
inline fairmatch::Instance random_tiny(int n_offline, int horizon, std::uint64_t seed) {
    fairmatch::Rng rng(seed);
    std::vector<fairmatch::Edge> edges;
    for (int i = 0; i < n_offline; ++i) {
        for (int j = 0; j < horizon; ++j) {
            if (rng.bernoulli(0.5)) edges.push_back({i, j});
        }
    }
    std::vector<double> weights(static_cast<std::size_t>(n_offline));
    for (double& w : weights) w = rng.uniform();
    std::vector<std::vector<int>> groups(2);
    for (int i = 0; i < n_offline; ++i) groups[rng.index(2)].push_back(i);
    std::erase_if(groups, [](const std::vector<int>& g) { return g.empty(); });
    return fairmatch::Instance(std::move(weights), std::vector<double>(static_cast<std::size_t>(horizon), 1.0),
                               std::move(edges), std::move(groups), horizon);
}

} // namespace testing
