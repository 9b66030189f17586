#pragma once

// Dense two-phase revised simplex for equality-form LPs
//
//   minimize c^T w  subject to  A w = b,  w >= 0,
//
// shaped for few rows (tens) and very many columns. The basis inverse is kept
// explicitly; columns are only touched through ColumnSource, so a caller can
// generate them on the fly instead of storing A.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace occm::lp {

class ColumnSource {
 public:
  virtual ~ColumnSource() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual std::span<const double> rhs() const = 0;
  virtual double cost(std::size_t j) const = 0;
  virtual void column(std::size_t j, std::span<double> out) const = 0;

  /// d_j = cost_weight * c_j - y . a_j for every column. The default goes
  /// through column(); structured sources should override it.
  virtual void price(std::span<const double> y, double cost_weight, std::span<double> d) const;
};

enum class ColumnKind : std::uint8_t { structural, slack };

/// Dense row-major LP.
class StandardLP final : public ColumnSource {
 public:
  StandardLP() = default;
  StandardLP(std::size_t rows, std::size_t cols);

  std::size_t rows() const override { return rows_; }
  std::size_t cols() const override { return cols_; }
  std::span<const double> rhs() const override { return b_; }
  double cost(std::size_t j) const override { return c_[j]; }
  void column(std::size_t j, std::span<double> out) const override;
  void price(std::span<const double> y, double cost_weight, std::span<double> d) const override;

  double& a(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double a(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  std::vector<double>& b() { return b_; }
  const std::vector<double>& b() const { return b_; }
  std::vector<double>& c() { return c_; }
  const std::vector<double>& c() const { return c_; }
  std::vector<ColumnKind>& kinds() { return kind_; }
  const std::vector<ColumnKind>& kinds() const { return kind_; }

  /// Appends a column (zero cost by default) and returns its index.
  std::size_t add_column(std::span<const double> entries, double cost = 0.0,
                         ColumnKind kind = ColumnKind::structural);
  /// Appends a row and returns its index.
  std::size_t add_row(std::span<const double> entries, double rhs);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> c_;
  std::vector<ColumnKind> kind_;
};

enum class Status : std::uint8_t { optimal, infeasible, unbounded };

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-10;        // smallest usable pivot / degenerate-step tolerance
  std::size_t refactor_every = 50;
  double refactor_residual = 1e-9;
  std::size_t max_iterations = 1'000'000;
  /// Non-improving iterations before switching to Bland's rule; 0 means
  /// 5 * (rows + cols).
  std::size_t bland_after = 0;
};

struct Solution {
  Status status = Status::infeasible;
  /// Basic column per row. Indices >= cols() are artificial columns left in
  /// the basis at zero level (redundant rows).
  std::vector<std::size_t> basis;
  std::vector<double> primal;  // size cols()
  double objective = 0.0;
  std::vector<double> duals;   // size rows(), y with c - A^T y >= 0 at optimum
  std::size_t iterations = 0;
  std::size_t phase1_iterations = 0;
  bool used_bland = false;
};

/// Throws NoConvergenceError when max_iterations is exceeded. A warm basis
/// (one column per row) skips phase 1 when it is nonsingular and feasible.
Solution solve(const ColumnSource& lp, const Options& options = {},
               std::span<const std::size_t> warm_basis = {});

enum class RowSense : std::uint8_t { le, eq };

struct ExtraRow {
  std::vector<double> coeffs;  // one per column of the base LP
  RowSense sense = RowSense::le;
  double rhs = 0.0;
};

/// Appends rows to a copy of `lp`; inequality rows get zero-cost slack
/// columns. The returned primal vector covers the base columns only.
Solution solve_with_extra_rows(const StandardLP& lp, std::span<const ExtraRow> extra,
                               const Options& options = {});

/// max_i |(A w - b)_i|
double primal_residual(const ColumnSource& lp, std::span<const double> w);

}  // namespace occm::lp
