#include "fairmatch/harness.hpp"

#include "fairmatch/bounds.hpp"
#include "fairmatch/error.hpp"
#include "fairmatch/ingest.hpp"
#include "fairmatch/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace fairmatch {

std::uint64_t trial_seed(std::uint64_t master_seed, long k) {
    return derive_seed(master_seed, {static_cast<std::uint64_t>(k)});
}

namespace {

struct Partial {
    std::vector<long> matches;
    std::vector<long long> group_sum;
    std::vector<long long> group_sq;
    long long matched = 0;
};

double half_width(double mean, double mean_sq, long n) {
    const double var = std::max(0.0, mean_sq - mean * mean);
    return kZ95 * std::sqrt(var / static_cast<double>(n));
}

bool all_isolated(const Instance& inst, const std::vector<int>& g) {
    return std::all_of(g.begin(), g.end(), [&](int i) { return inst.is_isolated(i); });
}

} // namespace

TrialReport run_policy(const std::string& policy, const PolicyContext& context, double lp_value,
                       const RunOptions& options) {
    if (options.trials < 1) throw UsageError("trials must be at least 1");
    if (context.instance == nullptr) throw UsageError("run_policy needs an instance");
    const Instance& inst = *context.instance;
    if (context.objective == Objective::gfm && inst.groups().empty()) {
        throw DataError("GFM objective requested but the instance has no groups");
    }
    make_policy(policy, context); // surface configuration errors before spawning workers

    const int n = inst.num_offline();
    const std::size_t groups = inst.groups().size();
    const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(options.trials)));
    std::vector<Partial> parts(static_cast<std::size_t>(threads));
    std::vector<double> vom_value(static_cast<std::size_t>(options.trials), 0.0);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));

    auto work = [&](int w) {
        try {
            Partial& p = parts[static_cast<std::size_t>(w)];
            p.matches.assign(static_cast<std::size_t>(n), 0);
            p.group_sum.assign(groups, 0);
            p.group_sq.assign(groups, 0);
            const long begin = options.trials * w / threads;
            const long end = options.trials * (w + 1) / threads;
            for (long k = begin; k < end; ++k) {
                auto pol = make_policy(policy, context);
                const MatchState state = run_trial(inst, *pol, trial_seed(options.master_seed, k));
                double vom = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (state.is_matched(i)) {
                        ++p.matches[static_cast<std::size_t>(i)];
                        vom += inst.weight(i);
                    }
                }
                vom_value[static_cast<std::size_t>(k)] = vom;
                for (std::size_t g = 0; g < groups; ++g) {
                    const long long c = state.group_matched[g];
                    p.group_sum[g] += c;
                    p.group_sq[g] += c * c;
                }
                p.matched += state.matched;
            }
        } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    TrialReport r;
    r.policy = policy;
    r.objective = context.objective;
    r.trials = options.trials;
    r.master_seed = options.master_seed;
    r.lp_value = lp_value;
    r.matches.assign(static_cast<std::size_t>(n), 0);
    std::vector<long long> gsum(groups, 0), gsq(groups, 0);
    long long matched = 0;
    for (const Partial& p : parts) {
        for (int i = 0; i < n; ++i) r.matches[static_cast<std::size_t>(i)] += p.matches[static_cast<std::size_t>(i)];
        for (std::size_t g = 0; g < groups; ++g) {
            gsum[g] += p.group_sum[g];
            gsq[g] += p.group_sq[g];
        }
        matched += p.matched;
    }
    const double trials = static_cast<double>(options.trials);
    r.mean_matched = static_cast<double>(matched) / trials;
    r.z.resize(static_cast<std::size_t>(n));
    r.z_half.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double z = static_cast<double>(r.matches[static_cast<std::size_t>(i)]) / trials;
        r.z[static_cast<std::size_t>(i)] = z;
        r.z_half[static_cast<std::size_t>(i)] = half_width(z, z, options.trials);
    }

    switch (context.objective) {
    case Objective::ifm: {
        int arg = -1;
        for (int i = 0; i < n; ++i) {
            if (inst.is_isolated(i)) continue;
            if (arg < 0 || r.z[static_cast<std::size_t>(i)] < r.z[static_cast<std::size_t>(arg)]) arg = i;
        }
        if (arg >= 0) {
            r.objective_estimate = r.z[static_cast<std::size_t>(arg)];
            r.objective_half = r.z_half[static_cast<std::size_t>(arg)];
        }
        break;
    }
    case Objective::gfm: {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < groups; ++g) {
            const auto& members = inst.groups()[g];
            if (members.empty() || all_isolated(inst, members)) continue;
            const double size = static_cast<double>(members.size());
            const double mean = static_cast<double>(gsum[g]) / trials / size;
            if (mean < best) {
                best = mean;
                r.objective_estimate = mean;
                r.objective_half = half_width(mean, static_cast<double>(gsq[g]) / trials / (size * size), options.trials);
            }
        }
        break;
    }
    case Objective::vom: {
        double sum = 0.0, sq = 0.0;
        for (double v : vom_value) {
            sum += v;
            sq += v * v;
        }
        r.objective_estimate = sum / trials;
        r.objective_half = half_width(r.objective_estimate, sq / trials, options.trials);
        break;
    }
    }

    if (lp_value > 0.0) {
        r.cr2 = r.objective_estimate / lp_value;
        r.cr2_half = r.objective_half / lp_value;
        if (context.lp != nullptr) {
            const auto mass = agent_mass(context.lp->x, inst);
            for (int i = 0; i < n; ++i) {
                const double x = mass[static_cast<std::size_t>(i)];
                if (x <= 1e-12) {
                    ++r.cr1_excluded;
                    continue;
                }
                const double ratio = r.z[static_cast<std::size_t>(i)] / x;
                if (!r.cr1 || ratio < *r.cr1) {
                    r.cr1 = ratio;
                    r.cr1_half = r.z_half[static_cast<std::size_t>(i)] / x;
                    r.cr1_agent = i;
                }
            }
        }
    }
    return r;
}

ExperimentResult run_experiment(const Instance& instance, const ExperimentConfig& config) {
    if (config.policies.empty()) throw UsageError("no policies requested");
    if (config.run.trials < 1) throw UsageError("trials must be at least 1");
    const auto violations = validate(instance);
    if (!violations.empty()) {
        throw DataError("invalid instance: " + violations.front().invariant + ": " + violations.front().detail);
    }
    if (!is_canonical(instance)) throw DataError("experiments need a canonical instance (run canonicalize first)");

    ExperimentResult result;
    result.lp = solve_lp(instance, config.objective, config.lp);
    result.policy_lp = config.objective == Objective::ifm ? normalize_ifm(result.lp, instance) : result.lp;

    bool needs_table = false;
    for (const auto& p : config.policies) needs_table = needs_table || policy_info(p).needs_table;
    if (needs_table) {
        result.table = plan(instance, result.policy_lp, config.plan);
        result.table->instance_hash = instance_hash(instance);
        result.table->lp_hash = lp_hash(result.policy_lp);
    }

    PolicyContext ctx{&instance, &result.policy_lp, result.table ? &*result.table : nullptr, config.objective};
    for (const auto& p : config.policies) {
        result.reports.push_back(run_policy(p, ctx, result.lp.value, config.run));
    }
    return result;
}

namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : std::string(); }

} // namespace

void write_report_json(std::ostream& out, const std::vector<TrialReport>& reports, const std::string& inst_hash) {
    json j;
    j["instance_hash"] = inst_hash;
    json arr = json::array();
    for (const auto& r : reports) {
        json e;
        e["policy"] = r.policy;
        e["objective"] = std::string(to_string(r.objective));
        e["trials"] = r.trials;
        e["master_seed"] = r.master_seed;
        e["matches"] = r.matches;
        e["objective_estimate"] = r.objective_estimate;
        e["objective_half_width"] = r.objective_half;
        e["lp_value"] = r.lp_value;
        e["cr1"] = optional_number(r.cr1);
        e["cr1_half_width"] = r.cr1_half;
        e["cr1_agent"] = r.cr1_agent;
        e["cr1_excluded"] = r.cr1_excluded;
        e["cr2"] = optional_number(r.cr2);
        e["cr2_half_width"] = r.cr2_half;
        e["mean_matched"] = r.mean_matched;
        arr.push_back(std::move(e));
    }
    j["reports"] = std::move(arr);
    out << j.dump(1) << "\n";
}

std::vector<TrialReport> read_report_json(std::istream& in) {
    std::vector<TrialReport> out;
    try {
        json j;
        in >> j;
        for (const auto& e : j.at("reports")) {
            TrialReport r;
            r.policy = e.at("policy").get<std::string>();
            r.objective = parse_objective(e.at("objective").get<std::string>());
            r.trials = e.at("trials").get<long>();
            r.master_seed = e.at("master_seed").get<std::uint64_t>();
            r.matches = e.at("matches").get<std::vector<long>>();
            r.objective_estimate = e.at("objective_estimate").get<double>();
            r.objective_half = e.at("objective_half_width").get<double>();
            r.lp_value = e.at("lp_value").get<double>();
            if (!e.at("cr1").is_null()) r.cr1 = e.at("cr1").get<double>();
            r.cr1_half = e.at("cr1_half_width").get<double>();
            r.cr1_agent = e.at("cr1_agent").get<int>();
            r.cr1_excluded = e.at("cr1_excluded").get<int>();
            if (!e.at("cr2").is_null()) r.cr2 = e.at("cr2").get<double>();
            r.cr2_half = e.at("cr2_half_width").get<double>();
            r.mean_matched = e.at("mean_matched").get<double>();
            const double trials = static_cast<double>(std::max(r.trials, 1L));
            for (long m : r.matches) {
                const double z = static_cast<double>(m) / trials;
                r.z.push_back(z);
                r.z_half.push_back(half_width(z, z, std::max(r.trials, 1L)));
            }
            out.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("report file: ") + e.what());
    }
    return out;
}

void write_report_csv(std::ostream& out, const std::vector<TrialReport>& reports, const std::string& inst_hash) {
    out << "instance_hash,policy,objective,trials,master_seed,lp_value,objective_estimate,objective_half_width,"
           "cr1,cr1_half_width,cr1_excluded,cr2,cr2_half_width,min_z,mean_matched\n";
    for (const auto& r : reports) {
        const double min_z = r.z.empty() ? 0.0 : *std::min_element(r.z.begin(), r.z.end());
        out << inst_hash << ',' << r.policy << ',' << to_string(r.objective) << ',' << r.trials << ','
            << r.master_seed << ',' << fixed(r.lp_value) << ',' << fixed(r.objective_estimate) << ','
            << fixed(r.objective_half) << ',' << fixed(r.cr1) << ',' << fixed(r.cr1_half) << ',' << r.cr1_excluded
            << ',' << fixed(r.cr2) << ',' << fixed(r.cr2_half) << ',' << fixed(min_z) << ',' << fixed(r.mean_matched)
            << '\n';
    }
}

void print_report(std::ostream& out, const std::vector<TrialReport>& reports) {
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %8s %20s %20s %20s %8s\n", "policy", "trials", "objective", "CR1", "CR2",
                  "min Z");
    out << line;
    auto pm = [](const std::optional<double>& v, double h) {
        return v ? fixed(*v) + " +- " + fixed(h) : std::string("n/a");
    };
    for (const auto& r : reports) {
        const double min_z = r.z.empty() ? 0.0 : *std::min_element(r.z.begin(), r.z.end());
        std::snprintf(line, sizeof line, "%-10s %8ld %20s %20s %20s %8.4f\n", r.policy.c_str(), r.trials,
                      pm(r.objective_estimate, r.objective_half).c_str(), pm(r.cr1, r.cr1_half).c_str(),
                      pm(r.cr2, r.cr2_half).c_str(), min_z);
        out << line;
    }
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

struct Cell {
    int horizon = 0;
    int degree = 0;
    std::string path;
};

} // namespace

SweepOutput sweep(const std::string& config_json) {
    json cfg;
    try {
        cfg = json::parse(config_json);
    } catch (const json::exception& e) {
        throw DataError(std::string("sweep config: malformed JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw DataError("sweep config: top level must be an object");
    static const std::vector<std::string> known = {"master_seed", "objective",  "policies", "trials",
                                                   "instances_per_cell", "threads", "sim_count", "plan_stride",
                                                   "k_cap", "generator", "grid"};
    for (const auto& [key, value] : cfg.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw DataError("sweep config: unknown field '" + key + "'");
        }
    }

    SweepOutput output;
    output.config_hash = hex64(fnv1a64(cfg.dump()));
    try {
        const auto master = get_or<std::uint64_t>(cfg, "master_seed", 0);
        const Objective objective = parse_objective(get_or<std::string>(cfg, "objective", "ifm"));
        const auto policies = cfg.at("policies").get<std::vector<std::string>>();
        for (const auto& p : policies) policy_info(p);
        const long trials = get_or<long>(cfg, "trials", 100);
        const int per_cell = get_or<int>(cfg, "instances_per_cell", 1);
        if (per_cell < 1) throw DataError("sweep config: instances_per_cell must be at least 1");

        ExperimentConfig ec;
        ec.policies = policies;
        ec.objective = objective;
        ec.run.trials = trials;
        ec.run.threads = get_or<int>(cfg, "threads", 1);
        ec.plan.sim_count = get_or<int>(cfg, "sim_count", 100);
        ec.plan.stride = get_or<int>(cfg, "plan_stride", 1);
        if (cfg.contains("k_cap") && !cfg.at("k_cap").is_null()) ec.lp.k_cap = cfg.at("k_cap").get<int>();

        const json gen = cfg.contains("generator") ? cfg.at("generator") : json{{"kind", "synthetic"}};
        const std::string kind = get_or<std::string>(gen, "kind", "synthetic");
        const json grid = cfg.contains("grid") ? cfg.at("grid") : json::object();

        std::vector<Cell> cells;
        if (kind == "synthetic") {
            const auto horizons = get_or<std::vector<int>>(grid, "horizon", {100});
            const auto degrees = get_or<std::vector<int>>(grid, "degree", {3});
            for (int t : horizons) {
                for (int d : degrees) cells.push_back({t, d, {}});
            }
        } else if (kind == "example1" || kind == "example-worst") {
            for (int n : get_or<std::vector<int>>(grid, "n", {10})) cells.push_back({n, 0, {}});
        } else if (kind == "files") {
            for (const auto& p : gen.at("paths").get<std::vector<std::string>>()) cells.push_back({0, 0, p});
        } else {
            throw DataError("sweep config: unknown generator kind '" + kind + "'");
        }

        std::ostringstream rows, summary;
        rows << "config_hash,master_seed,cell,horizon,degree,instance,instance_seed,instance_hash,policy,objective,"
                "trials,lp_value,objective_estimate,objective_half_width,cr1,cr1_half_width,cr1_excluded,cr2,"
                "cr2_half_width\n";
        summary << "config_hash,master_seed,cell,horizon,degree,policy,instances,mean_cr1,min_cr1,mean_cr2\n";

        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::map<std::string, std::vector<TrialReport>> per_policy;
            const int instances = cells[c].path.empty() ? per_cell : 1;
            for (int k = 0; k < instances; ++k) {
                const std::uint64_t inst_seed = derive_seed(master, {0x5EEDULL, c, static_cast<std::uint64_t>(k)});
                Instance inst;
                if (kind == "synthetic") {
                    const int n_off = get_or<int>(gen, "n_offline", cells[c].horizon);
                    inst = generate_synthetic(n_off, cells[c].horizon, cells[c].degree,
                                              parse_weight_mode(get_or<std::string>(gen, "weights", "unit")),
                                              parse_group_mode(get_or<std::string>(gen, "groups", "singletons")),
                                              inst_seed);
                } else if (kind == "example1") {
                    inst = make_example1(cells[c].horizon);
                } else if (kind == "example-worst") {
                    inst = make_example_worst(cells[c].horizon);
                } else {
                    inst = canonicalize(read_instance_file(cells[c].path));
                }
                ec.run.master_seed = derive_seed(master, {0x7A1A1ULL, c, static_cast<std::uint64_t>(k)});
                ec.plan.seed = derive_seed(master, {0x91A7ULL, c, static_cast<std::uint64_t>(k)});
                const ExperimentResult res = run_experiment(inst, ec);
                const std::string ih = instance_hash(inst);
                for (const auto& r : res.reports) {
                    rows << output.config_hash << ',' << master << ',' << c << ',' << inst.horizon() << ','
                         << cells[c].degree << ',' << k << ',' << inst_seed << ',' << ih << ',' << r.policy << ','
                         << to_string(objective) << ',' << r.trials << ',' << fixed(r.lp_value) << ','
                         << fixed(r.objective_estimate) << ',' << fixed(r.objective_half) << ',' << fixed(r.cr1)
                         << ',' << fixed(r.cr1_half) << ',' << r.cr1_excluded << ',' << fixed(r.cr2) << ','
                         << fixed(r.cr2_half) << '\n';
                    per_policy[r.policy].push_back(r);
                }
            }
            for (const auto& p : policies) {
                const auto& list = per_policy[p];
                double sum1 = 0.0, sum2 = 0.0, min1 = std::numeric_limits<double>::infinity();
                int n1 = 0, n2 = 0;
                for (const auto& r : list) {
                    if (r.cr1) {
                        sum1 += *r.cr1;
                        min1 = std::min(min1, *r.cr1);
                        ++n1;
                    }
                    if (r.cr2) {
                        sum2 += *r.cr2;
                        ++n2;
                    }
                }
                summary << output.config_hash << ',' << master << ',' << c << ','
                        << cells[c].horizon << ',' << cells[c].degree << ',' << p << ','
                        << list.size() << ',' << (n1 ? fixed(sum1 / n1) : "") << ',' << (n1 ? fixed(min1) : "") << ','
                        << (n2 ? fixed(sum2 / n2) : "") << '\n';
            }
        }
        output.rows_csv = rows.str();
        output.summary_csv = summary.str();
    } catch (const json::exception& e) {
        throw DataError(std::string("sweep config: ") + e.what());
    }
    return output;
}

} // namespace fairmatch
