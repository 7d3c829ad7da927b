#include "fairmatch/simplex.hpp"

#include "fairmatch/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fairmatch {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-11;
constexpr double kFeasEps = 1e-10;
constexpr int kDegenerateRunBeforeBland = 50;

} // namespace

void DenseSimplex::load(const LpProblem& problem) {
    num_vars_ = problem.num_vars;
    if (static_cast<int>(problem.objective.size()) != num_vars_) {
        throw InternalError("LP objective has " + std::to_string(problem.objective.size()) +
                            " coefficients for " + std::to_string(num_vars_) + " variables");
    }
    const std::size_t n = static_cast<std::size_t>(num_vars_);
    nonbasic_.resize(n);
    position_.assign(n, 0);
    for (std::size_t c = 0; c < n; ++c) {
        nonbasic_[c] = static_cast<int>(c);
        position_[c] = -static_cast<int>(c) - 1;
    }
    cost_.assign(n + 1, 0.0);
    for (std::size_t c = 0; c < n; ++c) cost_[c] = -problem.objective[c];
    rows_.clear();
    basic_.clear();
    next_slack_ = num_vars_;
    unbounded_ = false;
    for (const LpRow& row : problem.rows) {
        if (row.rhs < 0.0) {
            throw InternalError("dense simplex needs rhs >= 0 at load time (row " + row.name + ")");
        }
    }
    add_rows(problem.rows);
}

void DenseSimplex::add_rows(std::span<const LpRow> rows) {
    const std::size_t n = nonbasic_.size();
    for (const LpRow& row : rows) {
        std::vector<double> dense(n + 1, 0.0);
        dense[n] = row.rhs;
        for (const auto& [var, coeff] : row.terms) {
            if (var < 0 || var >= num_vars_) {
                throw InternalError("LP row " + row.name + " references variable " + std::to_string(var));
            }
            const int pos = position_[static_cast<std::size_t>(var)];
            if (pos < 0) {
                dense[static_cast<std::size_t>(-pos - 1)] += coeff;
            } else {
                // Substitute the basic variable's row expression.
                const auto& basis_row = rows_[static_cast<std::size_t>(pos)];
                for (std::size_t c = 0; c <= n; ++c) dense[c] -= coeff * basis_row[c];
            }
        }
        rows_.push_back(std::move(dense));
        const int slack = next_slack_++;
        basic_.push_back(slack);
        position_.push_back(static_cast<int>(rows_.size()) - 1);
    }
}

void DenseSimplex::pivot(std::size_t r, std::size_t c) {
    const std::size_t n = nonbasic_.size();
    auto& prow = rows_[r];
    const double p = prow[c];
    const double inv = 1.0 / p;
    for (std::size_t k = 0; k <= n; ++k) {
        if (k != c) prow[k] *= inv;
    }
    prow[c] = inv;

    auto eliminate = [&](std::vector<double>& row) {
        const double factor = row[c];
        if (factor == 0.0) return;
        for (std::size_t k = 0; k <= n; ++k) {
            if (k != c) row[k] -= factor * prow[k];
        }
        row[c] = -factor * inv;
    };
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        if (k != r) eliminate(rows_[k]);
    }
    eliminate(cost_);

    const int leaving = basic_[r];
    const int entering = nonbasic_[c];
    basic_[r] = entering;
    nonbasic_[c] = leaving;
    position_[static_cast<std::size_t>(entering)] = static_cast<int>(r);
    position_[static_cast<std::size_t>(leaving)] = -static_cast<int>(c) - 1;
}

bool DenseSimplex::primal_phase(long& pivots) {
    const std::size_t n = nonbasic_.size();
    int degenerate_run = 0;
    while (true) {
        const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
        std::size_t enter = n;
        for (std::size_t c = 0; c < n; ++c) {
            if (cost_[c] >= -kCostEps) continue;
            if (enter == n) {
                enter = c;
            } else if (bland) {
                if (nonbasic_[c] < nonbasic_[enter]) enter = c;
            } else if (cost_[c] < cost_[enter] ||
                       (cost_[c] == cost_[enter] && nonbasic_[c] < nonbasic_[enter])) {
                enter = c;
            }
        }
        if (enter == n) return true;

        std::size_t leave = rows_.size();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            const double a = rows_[r][enter];
            if (a <= kPivotEps) continue;
            const double ratio = std::max(rows_[r][n], 0.0) / a;
            if (leave == rows_.size() || ratio < best - 1e-12) {
                best = ratio;
                leave = r;
            } else if (ratio <= best + 1e-12 && basic_[r] < basic_[leave]) {
                best = std::min(best, ratio);
                leave = r;
            }
        }
        if (leave == rows_.size()) {
            unbounded_ = true;
            return true;
        }
        degenerate_run = best <= 1e-12 ? degenerate_run + 1 : 0;
        pivot(leave, enter);
        if (++pivots > max_pivots_) return false;
    }
}

bool DenseSimplex::dual_phase(long& pivots) {
    const std::size_t n = nonbasic_.size();
    while (true) {
        std::size_t leave = rows_.size();
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            if (rows_[r][n] >= -kFeasEps) continue;
            if (leave == rows_.size() || rows_[r][n] < rows_[leave][n] ||
                (rows_[r][n] == rows_[leave][n] && basic_[r] < basic_[leave])) {
                leave = r;
            }
        }
        if (leave == rows_.size()) return true;

        const auto& row = rows_[leave];
        std::size_t enter = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n; ++c) {
            if (row[c] >= -kPivotEps) continue;
            const double ratio = std::max(cost_[c], 0.0) / -row[c];
            if (enter == n || ratio < best - 1e-12) {
                best = ratio;
                enter = c;
            } else if (ratio <= best + 1e-12 && nonbasic_[c] < nonbasic_[enter]) {
                best = std::min(best, ratio);
                enter = c;
            }
        }
        if (enter == n) return false; // primal infeasible
        pivot(leave, enter);
        if (++pivots > max_pivots_) return false;
    }
}

RelaxationResult DenseSimplex::solve() {
    RelaxationResult result;
    long pivots = 0;
    unbounded_ = false;
    const std::size_t n = nonbasic_.size();

    bool dual_ok = dual_phase(pivots);
    if (!dual_ok) {
        result.status = pivots > max_pivots_ ? RelaxationStatus::iteration_limit : RelaxationStatus::infeasible;
        result.pivots = pivots;
        return result;
    }
    if (!primal_phase(pivots)) {
        result.status = RelaxationStatus::iteration_limit;
        result.pivots = pivots;
        return result;
    }
    if (unbounded_) {
        result.status = RelaxationStatus::unbounded;
        result.pivots = pivots;
        return result;
    }

    result.x.assign(static_cast<std::size_t>(num_vars_), 0.0);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        const int var = basic_[r];
        if (var < num_vars_) result.x[static_cast<std::size_t>(var)] = std::max(rows_[r][n], 0.0);
    }
    result.objective = cost_[n];
    result.pivots = pivots;
    return result;
}

std::unique_ptr<RelaxationSolver> make_relaxation_solver(const std::string& backend) {
    if (backend == "dense-simplex" || backend.empty()) return std::make_unique<DenseSimplex>();
    throw UsageError("unknown LP backend '" + backend + "'");
}

} // namespace fairmatch
