#include "fairmatch/benchmark_lp.hpp"

#include "fairmatch/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace fairmatch {

double subset_cap(SubsetCap kind, int size, int horizon) {
    if (size <= 0) return 0.0;
    switch (kind) {
    case SubsetCap::asymptotic:
        return -std::expm1(-static_cast<double>(size));
    case SubsetCap::finite_horizon: {
        if (size >= horizon) return 1.0;
        const double base = 1.0 - static_cast<double>(size) / horizon;
        return 1.0 - std::pow(base, horizon);
    }
    }
    return 1.0;
}

double FeasibilityReport::worst() const {
    return std::max({online_capacity, offline_capacity, subset, bounds});
}

int default_k_cap(const Instance& instance) {
    return std::max(1, std::min(20, instance.max_offline_degree()));
}

namespace {

std::string var_name(const Instance& instance, int edge) {
    const Edge& e = instance.edges()[static_cast<std::size_t>(edge)];
    return "x_" + std::to_string(e.offline) + "_" + std::to_string(e.online);
}

bool group_all_isolated(const Instance& instance, const std::vector<int>& group) {
    return std::all_of(group.begin(), group.end(), [&](int i) { return instance.is_isolated(i); });
}

} // namespace

LpModel build_lp(const Instance& instance, Objective objective, const LpOptions& options) {
    if (!is_canonical(instance)) {
        throw DataError("benchmark LP needs a canonical instance (all r_j = 1, |J| = T); canonicalize first");
    }
    if (objective == Objective::gfm && instance.groups().empty()) {
        throw DataError("GFM objective requested but the instance has no groups");
    }

    LpModel model;
    model.objective = objective;
    model.num_edges = static_cast<int>(instance.edges().size());
    model.has_lambda = objective != Objective::vom;
    model.k_cap = options.k_cap.value_or(default_k_cap(instance));
    if (model.k_cap < 1) throw UsageError("k_cap must be at least 1");
    model.cap = options.cap;
    model.horizon = instance.horizon();

    LpProblem& lp = model.problem;
    lp.num_vars = model.num_edges + (model.has_lambda ? 1 : 0);
    lp.objective.assign(static_cast<std::size_t>(lp.num_vars), 0.0);
    if (model.has_lambda) {
        lp.objective[static_cast<std::size_t>(model.lambda_index())] = 1.0;
    } else {
        for (int e = 0; e < model.num_edges; ++e) {
            lp.objective[static_cast<std::size_t>(e)] = instance.weight(instance.edges()[static_cast<std::size_t>(e)].offline);
        }
    }

    for (int j = 0; j < instance.num_online(); ++j) {
        LpRow row{{}, 1.0, "cap_j_" + std::to_string(j)};
        for (const Incidence& n : instance.online_neighbors(j)) row.terms.emplace_back(n.edge, 1.0);
        lp.rows.push_back(std::move(row));
        ++model.online_rows;
    }
    for (int i = 0; i < instance.num_offline(); ++i) {
        LpRow row{{}, 1.0, "cap_i_" + std::to_string(i)};
        for (const Incidence& n : instance.offline_neighbors(i)) row.terms.emplace_back(n.edge, 1.0);
        lp.rows.push_back(std::move(row));
        ++model.offline_rows;
    }

    const int lam = model.lambda_index();
    if (objective == Objective::ifm) {
        for (int i = 0; i < instance.num_offline(); ++i) {
            if (instance.is_isolated(i)) {
                model.warnings.push_back("offline agent " + std::to_string(i) + " is isolated" +
                                         (options.drop_isolated ? "; excluded from the min" : "; forces tau = 0"));
                if (options.drop_isolated) continue;
            }
            LpRow row{{{lam, 1.0}}, 0.0, "lam_i_" + std::to_string(i)};
            for (const Incidence& n : instance.offline_neighbors(i)) row.terms.emplace_back(n.edge, -1.0);
            lp.rows.push_back(std::move(row));
            ++model.link_rows;
        }
    } else if (objective == Objective::gfm) {
        const auto& groups = instance.groups();
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (group_all_isolated(instance, groups[g])) {
                model.warnings.push_back("group " + std::to_string(g) + " has only isolated agents" +
                                         (options.drop_isolated ? "; excluded from the min" : "; forces lambda = 0"));
                if (options.drop_isolated) continue;
            }
            LpRow row{{{lam, static_cast<double>(groups[g].size())}}, 0.0, "lam_g_" + std::to_string(g)};
            for (int i : groups[g]) {
                for (const Incidence& n : instance.offline_neighbors(i)) row.terms.emplace_back(n.edge, -1.0);
            }
            lp.rows.push_back(std::move(row));
            ++model.link_rows;
        }
    }
    if (model.has_lambda && model.link_rows == 0) {
        lp.rows.push_back(LpRow{{{lam, 1.0}}, 1.0, "lam_cap"});
    }
    return model;
}

std::vector<SubsetCut> separate(std::span<const double> x, const Instance& instance, int k_cap, SubsetCap cap,
                                double tolerance) {
    std::vector<SubsetCut> cuts;
    std::vector<std::pair<double, Incidence>> entries;
    for (int i = 0; i < instance.num_offline(); ++i) {
        const auto nbrs = instance.offline_neighbors(i);
        entries.clear();
        for (const Incidence& n : nbrs) entries.emplace_back(x[static_cast<std::size_t>(n.edge)], n);
        // Largest values first; ties by type id so the reported subset is deterministic.
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second.agent < b.second.agent;
        });
        const int limit = std::min(k_cap, static_cast<int>(entries.size()));
        double prefix = 0.0;
        for (int s = 1; s <= limit; ++s) {
            prefix += entries[static_cast<std::size_t>(s - 1)].first;
            const double rhs = subset_cap(cap, s, instance.horizon());
            if (prefix > rhs + tolerance) {
                SubsetCut cut;
                cut.agent = i;
                cut.rhs = rhs;
                cut.violation = prefix - rhs;
                for (int k = 0; k < s; ++k) cut.edges.push_back(entries[static_cast<std::size_t>(k)].second.edge);
                std::sort(cut.edges.begin(), cut.edges.end());
                cuts.push_back(std::move(cut));
            }
        }
    }
    return cuts;
}

std::vector<double> agent_mass(std::span<const double> x, const Instance& instance) {
    std::vector<double> mass(static_cast<std::size_t>(instance.num_offline()), 0.0);
    for (int i = 0; i < instance.num_offline(); ++i) {
        double sum = 0.0;
        for (const Incidence& n : instance.offline_neighbors(i)) sum += x[static_cast<std::size_t>(n.edge)];
        mass[static_cast<std::size_t>(i)] = sum;
    }
    return mass;
}

double evaluate_objective(std::span<const double> x, const Instance& instance, Objective objective,
                          bool drop_isolated) {
    const auto mass = agent_mass(x, instance);
    switch (objective) {
    case Objective::ifm: {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < instance.num_offline(); ++i) {
            if (drop_isolated && instance.is_isolated(i)) continue;
            best = std::min(best, mass[static_cast<std::size_t>(i)]);
        }
        return std::isfinite(best) ? best : 0.0;
    }
    case Objective::gfm: {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& g : instance.groups()) {
            if (g.empty() || (drop_isolated && group_all_isolated(instance, g))) continue;
            double sum = 0.0;
            for (int i : g) sum += mass[static_cast<std::size_t>(i)];
            best = std::min(best, sum / static_cast<double>(g.size()));
        }
        return std::isfinite(best) ? best : 0.0;
    }
    case Objective::vom: {
        double sum = 0.0;
        for (int i = 0; i < instance.num_offline(); ++i) sum += instance.weight(i) * mass[static_cast<std::size_t>(i)];
        return sum;
    }
    }
    return 0.0;
}

LpSolution solve(const LpModel& model, const Instance& instance, const LpOptions& options) {
    auto backend = make_relaxation_solver(options.backend);
    backend->load(model.problem);

    LpSolution sol;
    sol.objective = model.objective;
    sol.backend = backend->name();

    std::map<std::pair<int, int>, int> names_used; // (agent, size) -> count
    std::set<std::pair<int, std::vector<int>>> installed;

    for (int round = 1;; ++round) {
        if (round > options.max_rounds) {
            std::ostringstream msg;
            msg << "cutting-plane loop exceeded " << options.max_rounds << " rounds (" << sol.cut_count
                << " cuts installed, " << sol.pivots << " pivots)";
            throw InternalError(msg.str());
        }
        RelaxationResult relax = backend->solve();
        sol.pivots += relax.pivots;
        sol.rounds = round;
        if (relax.status != RelaxationStatus::optimal) {
            const char* what = relax.status == RelaxationStatus::unbounded    ? "unbounded"
                               : relax.status == RelaxationStatus::infeasible ? "infeasible"
                                                                              : "pivot limit reached";
            throw InternalError(std::string("benchmark LP relaxation ") + what + " in round " +
                                std::to_string(round) + " (x = 0 is always feasible)");
        }

        std::span<const double> x(relax.x.data(), static_cast<std::size_t>(model.num_edges));
        auto cuts = separate(x, instance, model.k_cap, model.cap);
        if (cuts.empty()) {
            sol.x.assign(x.begin(), x.end());
            for (double& v : sol.x) v = std::clamp(v, 0.0, 1.0);
            sol.value = relax.objective;
            break;
        }

        std::vector<LpRow> rows;
        for (auto& cut : cuts) {
            if (!installed.emplace(cut.agent, cut.edges).second) {
                throw InternalError("separation returned an installed cut for agent " + std::to_string(cut.agent) +
                                    " (violation " + std::to_string(cut.violation) + "); numerical breakdown");
            }
            const int s = static_cast<int>(cut.edges.size());
            const int dup = names_used[{cut.agent, s}]++;
            std::string name = "cut_" + std::to_string(cut.agent) + "_" + std::to_string(s);
            if (dup > 0) name += "_" + std::to_string(dup);
            LpRow row{{}, cut.rhs, std::move(name)};
            for (int e : cut.edges) row.terms.emplace_back(e, 1.0);
            rows.push_back(std::move(row));
            sol.cuts.push_back(std::move(cut));
        }
        sol.cut_count += static_cast<int>(rows.size());
        backend->add_rows(rows);
    }

    sol.agent_mass = agent_mass(sol.x, instance);
    if (model.objective == Objective::vom) {
        sol.value = evaluate_objective(sol.x, instance, Objective::vom);
    }
    sol.status = "optimal";
    return sol;
}

LpSolution solve_lp(const Instance& instance, Objective objective, const LpOptions& options) {
    return solve(build_lp(instance, objective, options), instance, options);
}

LpSolution normalize_ifm(const LpSolution& solution, const Instance& instance) {
    const double tau = solution.value;
    if (tau < -1e-12) {
        throw InternalError("normalize_ifm: negative LP value " + std::to_string(tau));
    }
    LpSolution out = solution;
    const auto mass = agent_mass(solution.x, instance);
    for (int i = 0; i < instance.num_offline(); ++i) {
        const double m = mass[static_cast<std::size_t>(i)];
        if (m <= tau || m <= 0.0) continue;
        const double scale = std::max(tau, 0.0) / m;
        for (const Incidence& n : instance.offline_neighbors(i)) out.x[static_cast<std::size_t>(n.edge)] *= scale;
    }
    out.agent_mass = agent_mass(out.x, instance);
    return out;
}

FeasibilityReport check_feasibility(std::span<const double> x, const Instance& instance, int k_cap, SubsetCap cap) {
    FeasibilityReport report;
    for (double v : x) report.bounds = std::max({report.bounds, -v, v - 1.0});
    for (int j = 0; j < instance.num_online(); ++j) {
        double sum = 0.0;
        for (const Incidence& n : instance.online_neighbors(j)) sum += x[static_cast<std::size_t>(n.edge)];
        report.online_capacity = std::max(report.online_capacity, sum - 1.0);
    }
    std::vector<double> values;
    for (int i = 0; i < instance.num_offline(); ++i) {
        values.clear();
        for (const Incidence& n : instance.offline_neighbors(i)) values.push_back(x[static_cast<std::size_t>(n.edge)]);
        std::sort(values.begin(), values.end(), std::greater<>());
        double total = 0.0;
        for (double v : values) total += v;
        report.offline_capacity = std::max(report.offline_capacity, total - 1.0);
        double prefix = 0.0;
        const int limit = std::min(k_cap, static_cast<int>(values.size()));
        for (int s = 1; s <= limit; ++s) {
            prefix += values[static_cast<std::size_t>(s - 1)];
            report.subset = std::max(report.subset, prefix - subset_cap(cap, s, instance.horizon()));
        }
    }
    return report;
}

void export_lp(std::ostream& out, const LpModel& model, const LpSolution& solution, const Instance& instance) {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto name_of = [&](int var) {
        return var == model.lambda_index() && model.has_lambda ? std::string("lambda") : var_name(instance, var);
    };
    auto write_row = [&](const LpRow& row) {
        out << " " << row.name << ":";
        bool first = true;
        for (const auto& [var, coeff] : row.terms) {
            if (coeff < 0) {
                out << " - ";
            } else if (!first) {
                out << " + ";
            } else {
                out << " ";
            }
            if (std::abs(coeff) != 1.0) out << num(std::abs(coeff)) << " ";
            out << name_of(var);
            first = false;
        }
        if (first) out << " 0 " << name_of(0);
        out << " <= " << num(row.rhs) << "\n";
    };

    out << "\\ benchmark LP (" << to_string(model.objective) << "), K = " << model.k_cap << "\n";
    out << "Maximize\n obj:";
    bool first = true;
    for (int v = 0; v < model.problem.num_vars; ++v) {
        const double c = model.problem.objective[static_cast<std::size_t>(v)];
        if (c == 0.0) continue;
        out << (first ? " " : " + ") << num(c) << " " << name_of(v);
        first = false;
    }
    if (first) out << " 0";
    out << "\nSubject To\n";
    for (const LpRow& row : model.problem.rows) write_row(row);
    std::map<std::pair<int, int>, int> used;
    for (const SubsetCut& cut : solution.cuts) {
        const int s = static_cast<int>(cut.edges.size());
        const int dup = used[{cut.agent, s}]++;
        LpRow row{{}, cut.rhs, "cut_" + std::to_string(cut.agent) + "_" + std::to_string(s)};
        if (dup > 0) row.name += "_" + std::to_string(dup);
        for (int e : cut.edges) row.terms.emplace_back(e, 1.0);
        write_row(row);
    }
    out << "Bounds\n";
    for (int e = 0; e < model.num_edges; ++e) out << " 0 <= " << var_name(instance, e) << " <= 1\n";
    if (model.has_lambda) out << " lambda >= 0\n";
    out << "End\n";
}

} // namespace fairmatch
