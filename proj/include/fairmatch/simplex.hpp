#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fairmatch {

/// Sparse row  sum_k coeff_k * x_{var_k} <= rhs.
struct LpRow {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
    std::string name;
};

/// maximize c'x  subject to  rows,  x >= 0.
struct LpProblem {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<LpRow> rows;
};

enum class RelaxationStatus { optimal, unbounded, infeasible, iteration_limit };

struct RelaxationResult {
    RelaxationStatus status = RelaxationStatus::optimal;
    double objective = 0.0;
    std::vector<double> x;
    long pivots = 0;
};

/// Backend interface for the cutting-plane driver. Rows may be appended
/// between solves; implementations are expected to warm start.
class RelaxationSolver {
public:
    virtual ~RelaxationSolver() = default;
    virtual std::string name() const = 0;
    virtual void load(const LpProblem& problem) = 0;
    virtual void add_rows(std::span<const LpRow> rows) = 0;
    virtual RelaxationResult solve() = 0;
};

/// Dense-tableau simplex for problems whose rows all have rhs >= 0 at load
/// time, so the all-slack basis is primal feasible. Rows appended later may
/// cut off the current vertex; they are repaired with the dual simplex.
///
/// Pivoting is deterministic: Dantzig pricing with lowest-index ties,
/// falling back to Bland's rule after a run of degenerate pivots.
class DenseSimplex final : public RelaxationSolver {
public:
    explicit DenseSimplex(long max_pivots = 5'000'000) : max_pivots_(max_pivots) {}

    std::string name() const override { return "dense-simplex"; }
    void load(const LpProblem& problem) override;
    void add_rows(std::span<const LpRow> rows) override;
    RelaxationResult solve() override;

    std::size_t num_rows() const noexcept { return rows_.size(); }

private:
    void pivot(std::size_t r, std::size_t c);
    bool primal_phase(long& pivots);
    bool dual_phase(long& pivots);

    int num_vars_ = 0;
    int next_slack_ = 0;
    long max_pivots_;
    // rows_[r] holds coefficients over nonbasic columns followed by the rhs:
    //   x_{basic_[r]} = rows_[r][n] - sum_c rows_[r][c] * x_{nonbasic_[c]}
    std::vector<std::vector<double>> rows_;
    std::vector<double> cost_; // z = cost_[n] - sum_c cost_[c] * x_{nonbasic_[c]}
    std::vector<int> basic_;
    std::vector<int> nonbasic_;
    std::vector<int> position_; // var -> row (>= 0) or -(column + 1)
    bool unbounded_ = false;
};

std::unique_ptr<RelaxationSolver> make_relaxation_solver(const std::string& backend);

} // namespace fairmatch
