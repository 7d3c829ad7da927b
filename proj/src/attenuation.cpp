#include "fairmatch/attenuation.hpp"

#include "fairmatch/error.hpp"
#include "fairmatch/policy.hpp"
#include "fairmatch/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace fairmatch {

AttenuationTable AttenuationTable::identity(int num_offline, int horizon) {
    AttenuationTable table;
    table.num_offline = num_offline;
    table.horizon = horizon;
    const auto cells = static_cast<std::size_t>(num_offline) * static_cast<std::size_t>(std::max(horizon, 0));
    table.beta.assign(cells, 1.0);
    table.alpha.assign(cells, 1.0);
    return table;
}

std::vector<double> target_curve(int horizon) {
    if (horizon < 1) throw UsageError("target_curve: T must be at least 1");
    std::vector<double> out(static_cast<std::size_t>(horizon));
    const double base = 1.0 - 1.0 / horizon;
    for (int t = 1; t <= horizon; ++t) out[static_cast<std::size_t>(t - 1)] = std::pow(base, t - 1);
    return out;
}

AttenuationTable plan(const Instance& instance, const LpSolution& lp, const PlanOptions& options) {
    if (options.sim_count < 1) throw UsageError("sim_count must be at least 1");
    if (options.stride < 1) throw UsageError("stride must be at least 1");
    if (!is_canonical(instance)) throw DataError("attenuation planning needs a canonical instance");

    const int n = instance.num_offline();
    const int horizon = instance.horizon();
    AttenuationTable table = AttenuationTable::identity(n, horizon);
    table.sim_count = options.sim_count;
    table.stride = options.stride;
    table.seed = options.seed;
    if (horizon < 2) return table;

    const auto target = target_curve(horizon);
    const auto T = static_cast<std::size_t>(horizon);
    auto cell = [T](int i, int t) { return static_cast<std::size_t>(i) * T + static_cast<std::size_t>(t - 1); };

    PolicyContext ctx{&instance, &lp, &table, Objective::ifm};
    std::vector<int> active_count(static_cast<std::size_t>(n));

    for (int t = 2; t <= horizon; ++t) {
        if ((t - 2) % options.stride != 0) {
            for (int i = 0; i < n; ++i) {
                table.beta[cell(i, t)] = table.beta[cell(i, t - 1)];
                table.alpha[cell(i, t)] = table.alpha[cell(i, t - 1)];
            }
            continue;
        }

        std::fill(active_count.begin(), active_count.end(), 0);
        for (int r = 0; r < options.sim_count; ++r) {
            const std::uint64_t rep = derive_seed(options.seed, {static_cast<std::uint64_t>(Stream::plan),
                                                                 static_cast<std::uint64_t>(t),
                                                                 static_cast<std::uint64_t>(r)});
            ArrivalSequence arrivals = sample_arrivals(instance, arrival_seed(rep));
            arrivals.rounds.resize(static_cast<std::size_t>(t - 1));
            Rng rng(policy_seed(rep));
            auto policy = make_policy("samp-ab", ctx);
            const MatchState state = run_trial(instance, *policy, arrivals, rng);
            for (int i = 0; i < n; ++i) {
                if (state.is_active(i)) ++active_count[static_cast<std::size_t>(i)];
            }
        }

        for (int i = 0; i < n; ++i) {
            const double alpha = static_cast<double>(active_count[static_cast<std::size_t>(i)]) / options.sim_count;
            table.alpha[cell(i, t)] = alpha;
            table.beta[cell(i, t)] = alpha > 0.0 ? std::clamp(target[static_cast<std::size_t>(t - 1)] / alpha, 0.0, 1.0) : 1.0;
        }
    }
    return table;
}

namespace {

constexpr int kTableVersion = 1;

nlohmann::json matrix(const std::vector<double>& values, int rows, int cols) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < rows; ++i) {
        auto begin = values.begin() + static_cast<std::ptrdiff_t>(i) * cols;
        out.push_back(std::vector<double>(begin, begin + cols));
    }
    return out;
}

std::vector<double> flatten(const nlohmann::json& rows, int n, int horizon, const char* field) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
        throw DataError(std::string("attenuation table: '") + field + "' must have one row per offline agent");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(horizon));
    for (const auto& row : rows) {
        if (!row.is_array() || static_cast<int>(row.size()) != horizon) {
            throw DataError(std::string("attenuation table: every '") + field + "' row needs T entries");
        }
        for (const auto& v : row) out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

void write_table(std::ostream& out, const AttenuationTable& table) {
    nlohmann::json j;
    j["version"] = kTableVersion;
    j["num_offline"] = table.num_offline;
    j["horizon"] = table.horizon;
    j["sim_count"] = table.sim_count;
    j["stride"] = table.stride;
    j["seed"] = table.seed;
    j["instance_hash"] = table.instance_hash;
    j["lp_hash"] = table.lp_hash;
    j["beta"] = matrix(table.beta, table.num_offline, table.horizon);
    j["alpha"] = matrix(table.alpha, table.num_offline, table.horizon);
    out << j.dump(1) << "\n";
}

AttenuationTable read_table(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("attenuation table: malformed JSON: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != kTableVersion) {
            throw DataError("attenuation table: unsupported version " + j.at("version").dump());
        }
        AttenuationTable table;
        table.num_offline = j.at("num_offline").get<int>();
        table.horizon = j.at("horizon").get<int>();
        table.sim_count = j.at("sim_count").get<int>();
        table.stride = j.at("stride").get<int>();
        table.seed = j.at("seed").get<std::uint64_t>();
        table.instance_hash = j.at("instance_hash").get<std::string>();
        table.lp_hash = j.at("lp_hash").get<std::string>();
        table.beta = flatten(j.at("beta"), table.num_offline, table.horizon, "beta");
        table.alpha = flatten(j.at("alpha"), table.num_offline, table.horizon, "alpha");
        return table;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("attenuation table: ") + e.what());
    }
}

} // namespace fairmatch
