#include "fairmatch/bounds.hpp"

#include "fairmatch/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace fairmatch {

namespace {

constexpr double kResidualCut = 1e-12;

// 1 - e^{-s}
double cap(int s) { return -std::expm1(-static_cast<double>(s)); }

void check_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError(std::string(what) + " must lie in [0, 1], got " + std::to_string(v));
}

} // namespace

std::vector<double> minimizer_set(double tau) {
    check_unit(tau, "tau");
    std::vector<double> out;
    double acc = 0.0;
    for (int k = 1;; ++k) {
        const double next = cap(k);
        if (next > tau) {
            if (tau - acc > 0.0) out.push_back(tau - acc);
            break;
        }
        out.push_back(next - acc);
        acc = next;
        if (tau - acc < kResidualCut) break;
    }
    return out;
}

std::vector<double> minimizer_set_capped(double tau) {
    check_unit(tau, "x");
    std::vector<double> out;
    double acc = 0.0;
    for (int k = 1; k <= 2; ++k) {
        const double next = cap(k);
        if (next > tau) break;
        out.push_back(next - acc);
        acc = next;
    }
    if (tau - acc > 0.0) out.push_back(tau - acc);
    return out;
}

double sampb_bound(double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) throw UsageError("sampb bound needs tau in (0, 1], got " + std::to_string(tau));
    const double boost = std::expm1(tau);
    double sum = 0.0;
    for (double x : minimizer_set(tau)) sum += std::log1p(x * boost);
    return -std::expm1(-sum / tau) / tau;
}

double boost_factor(double p, double x) { return x / (x + (1.0 - x) * p); }

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tolerance) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tolerance, 50);
}

double sampab_bound(double x_star, double kappa) {
    if (!(x_star > 0.0 && x_star <= 1.0)) throw UsageError("x must lie in (0, 1], got " + std::to_string(x_star));
    check_unit(kappa, "kappa");
    double early = 0.0;
    double late = 0.0;
    for (double x : minimizer_set_capped(x_star)) {
        early += integrate([x](double z) {
            const double p = std::exp(-z);
            return p * boost_factor(p, x);
        }, 0.0, kappa);
        late += integrate([x](double z) { return boost_factor(std::exp(-z), x); }, kappa, 1.0);
    }
    return early + std::exp(-kappa) * -std::expm1(-late);
}

BoundEvaluation minimize_sampab_ratio(const GridOptions& options) {
    if (options.x_points < 1 || options.kappa_points < 2) throw UsageError("grid needs x_points >= 1, kappa_points >= 2");
    BoundEvaluation best;
    best.value = std::numeric_limits<double>::infinity();
    auto ratio = [&](double x, double k) {
        ++best.evaluations;
        return sampab_bound(x, k) / x;
    };
    for (int a = 1; a <= options.x_points; ++a) {
        const double x = static_cast<double>(a) / options.x_points;
        for (int b = 0; b < options.kappa_points; ++b) {
            const double k = static_cast<double>(b) / (options.kappa_points - 1);
            const double v = ratio(x, k);
            if (v < best.value) {
                best.value = v;
                best.x = x;
                best.kappa = k;
            }
        }
    }
    if (options.refine) {
        // Compass search around the grid argmin.
        double h = 1.0 / options.x_points;
        while (h > 1e-8) {
            bool moved = false;
            for (int dx = -1; dx <= 1; ++dx) {
                for (int dk = -1; dk <= 1; ++dk) {
                    if (dx == 0 && dk == 0) continue;
                    const double x = std::clamp(best.x + dx * h, 1e-9, 1.0);
                    const double k = std::clamp(best.kappa + dk * h, 0.0, 1.0);
                    const double v = ratio(x, k);
                    if (v < best.value - 1e-15) {
                        best.value = v;
                        best.x = x;
                        best.kappa = k;
                        moved = true;
                    }
                }
            }
            if (!moved) h *= 0.5;
        }
    }
    best.set = minimizer_set_capped(best.x);
    return best;
}

double allocation_minimum(double tau, double step, int max_parts) {
    check_unit(tau, "tau");
    if (!(step > 0.0) || max_parts < 1) throw UsageError("allocation_minimum: bad step or max_parts");
    const int units = static_cast<int>(std::lround(tau / step));
    if (units == 0) return 0.0;
    const double boost = std::expm1(tau);
    std::vector<double> gain(static_cast<std::size_t>(units) + 1);
    for (int p = 0; p <= units; ++p) gain[static_cast<std::size_t>(p)] = std::log1p(p * step * boost);

    const double inf = std::numeric_limits<double>::infinity();
    const auto width = static_cast<std::size_t>(units) + 1;
    // layer[u * width + v]: min cost with total u and smallest (= last) part v.
    std::vector<double> layer(width * width, inf);
    std::vector<double> next(width * width, inf);
    std::vector<double> suffix(width);

    double best = inf;
    for (int s = 1; s <= max_parts; ++s) {
        const int limit = std::min(units, static_cast<int>(std::floor(cap(s) / step + 1e-9)));
        std::fill(next.begin(), next.end(), inf);
        if (s == 1) {
            for (int p = 1; p <= limit; ++p) next[static_cast<std::size_t>(p) * width + static_cast<std::size_t>(p)] = gain[static_cast<std::size_t>(p)];
        } else {
            for (int u = 1; u < limit; ++u) {
                const double* row = &layer[static_cast<std::size_t>(u) * width];
                double running = inf;
                for (int v = units; v >= 0; --v) {
                    running = std::min(running, row[v]);
                    suffix[static_cast<std::size_t>(v)] = running;
                }
                for (int p = 1; u + p <= limit; ++p) {
                    const double prev = suffix[static_cast<std::size_t>(p)];
                    if (prev == inf) break; // suffix minima only grow with p
                    double& cell = next[static_cast<std::size_t>(u + p) * width + static_cast<std::size_t>(p)];
                    cell = std::min(cell, prev + gain[static_cast<std::size_t>(p)]);
                }
            }
        }
        for (std::size_t v = 0; v < width; ++v) best = std::min(best, next[static_cast<std::size_t>(units) * width + v]);
        std::swap(layer, next);
    }
    return best;
}

Instance make_example1(int n) {
    if (n < 2) throw UsageError("make_example1 needs n >= 2");
    const double eps = 1.0 / n;
    const int agents = n * (n - 1) + 1;
    std::vector<double> weights(static_cast<std::size_t>(agents), eps * eps * eps);
    weights[0] = 1.0;
    std::vector<Edge> edges;
    for (int j = 0; j < n; ++j) {
        edges.push_back({0, j});
        for (int k = 0; k < n - 1; ++k) edges.push_back({1 + j * (n - 1) + k, j});
    }
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < agents; ++i) groups.push_back({i});
    return Instance(std::move(weights), std::vector<double>(static_cast<std::size_t>(n), 1.0), std::move(edges),
                    std::move(groups), n);
}

LpSolution example1_reference_solution(const Instance& example1) {
    LpSolution sol;
    sol.objective = Objective::vom;
    sol.x.assign(example1.edges().size(), 1.0 / example1.horizon());
    sol.agent_mass = agent_mass(sol.x, example1);
    sol.value = evaluate_objective(sol.x, example1, Objective::vom);
    sol.status = "reference";
    sol.backend = "closed-form";
    return sol;
}

Instance make_example_worst(int n) {
    if (n < 2) throw UsageError("make_example_worst needs n >= 2");
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) edges.push_back({i, 0});
    for (int j = 1; j < n; ++j) edges.push_back({j, j});
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups.push_back({i});
    return Instance(std::vector<double>(static_cast<std::size_t>(n), 1.0),
                    std::vector<double>(static_cast<std::size_t>(n), 1.0), std::move(edges), std::move(groups), n);
}

namespace {

struct OracleSearch {
    const Instance& inst;
    Objective objective;
    std::vector<int> considered;              // agents that enter the IFM min
    std::vector<const std::vector<int>*> groups; // groups that enter the GFM min
    const std::vector<int>* sequence = nullptr;
    double best = 0.0;

    double score(std::uint64_t covered) const {
        auto has = [covered](int i) { return (covered >> i) & 1ULL; };
        switch (objective) {
        case Objective::ifm: {
            if (considered.empty()) return 0.0;
            for (int i : considered) {
                if (!has(i)) return 0.0;
            }
            return 1.0;
        }
        case Objective::gfm: {
            if (groups.empty()) return 0.0;
            double worst = std::numeric_limits<double>::infinity();
            for (const auto* g : groups) {
                int hit = 0;
                for (int i : *g) hit += static_cast<int>(has(i));
                worst = std::min(worst, static_cast<double>(hit) / static_cast<double>(g->size()));
            }
            return worst;
        }
        case Objective::vom: {
            double sum = 0.0;
            for (int i = 0; i < inst.num_offline(); ++i) {
                if (has(i)) sum += inst.weight(i);
            }
            return sum;
        }
        }
        return 0.0;
    }

    void dfs(std::size_t t, std::uint64_t covered) {
        if (t == sequence->size()) {
            best = std::max(best, score(covered));
            return;
        }
        const int j = (*sequence)[t];
        for (const Incidence& n : inst.online_neighbors(j)) {
            const std::uint64_t bit = 1ULL << n.agent;
            if (!(covered & bit)) dfs(t + 1, covered | bit);
        }
        dfs(t + 1, covered);
    }
};

} // namespace

double clairvoyant_oracle(const Instance& instance, Objective objective, bool drop_isolated) {
    const int n_j = instance.num_online();
    const int horizon = instance.horizon();
    if (instance.num_offline() > 64) throw UsageError("clairvoyant oracle supports at most 64 offline agents");
    if (horizon < 1 || n_j < 1) return 0.0;
    if (std::pow(static_cast<double>(n_j), horizon) > 1e6) {
        throw UsageError("clairvoyant oracle: |J|^T = " + std::to_string(n_j) + "^" + std::to_string(horizon) +
                         " exceeds 1e6 sequences");
    }
    if (objective == Objective::gfm && instance.groups().empty()) {
        throw DataError("GFM objective requested but the instance has no groups");
    }

    OracleSearch search{instance, objective, {}, {}};
    for (int i = 0; i < instance.num_offline(); ++i) {
        if (!(drop_isolated && instance.is_isolated(i))) search.considered.push_back(i);
    }
    for (const auto& g : instance.groups()) {
        if (g.empty()) continue;
        const bool all_isolated =
            std::all_of(g.begin(), g.end(), [&](int i) { return instance.is_isolated(i); });
        if (!(drop_isolated && all_isolated)) search.groups.push_back(&g);
    }

    // OPT(S) only depends on the multiset of arrivals.
    std::map<std::vector<int>, double> memo;
    std::vector<int> seq(static_cast<std::size_t>(horizon), 0);
    std::vector<int> sorted;
    double expected = 0.0;
    while (true) {
        double prob = 1.0;
        for (int j : seq) prob *= instance.rate(j) / horizon;
        if (prob > 0.0) {
            sorted = seq;
            std::sort(sorted.begin(), sorted.end());
            auto it = memo.find(sorted);
            if (it == memo.end()) {
                search.best = 0.0;
                search.sequence = &sorted;
                search.dfs(0, 0);
                it = memo.emplace(sorted, search.best).first;
            }
            expected += prob * it->second;
        }
        int pos = horizon - 1;
        while (pos >= 0 && ++seq[static_cast<std::size_t>(pos)] == n_j) seq[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) break;
    }
    return expected;
}

} // namespace fairmatch
