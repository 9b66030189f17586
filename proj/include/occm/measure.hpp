#pragma once

// Finite LP over occupational measures on a (state cell, control) grid.
//
// Rows, in order:
//   0                  normalization, sum of weights = 1
//   1 .. n_test        stationarity, sum_w  grad phi(x_i) . f(x_i, u_j) = 0
//                      for every monomial phi = xh^a yh^b, 1 <= a + b <= N,
//                      in box-normalized coordinates xh, yh in [-1, 1]
//   then               one row per averaged constraint, mu(C_k) <= 0 or = 0
//   then               pinned rows added by a caller, mu(g) = c
// Structural column index = cell * n_u + control. Each <= constraint owns a
// slack column after the structural block.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "occm/domain.hpp"
#include "occm/expr.hpp"
#include "occm/lp.hpp"

namespace occm {

/// A function of state and control: a parsed expression, or a callable
/// with a label (used when an integrand has no closed form, e.g. P1 u2).
class Integrand {
 public:
  using Fn = std::function<double(Vec2 x, Vec2 u)>;

  Integrand(const Expr& e);  // NOLINT: expressions convert implicitly
  Integrand(std::string label, Fn fn) : label_(std::move(label)), fn_(std::move(fn)) {}

  double operator()(Vec2 x, Vec2 u) const { return fn_(x, u); }
  const std::string& label() const { return label_; }
  /// The expression, when the integrand was built from one.
  const std::optional<Expr>& expression() const { return expr_; }

 private:
  std::string label_;
  Fn fn_;
  std::optional<Expr> expr_;
};

struct DiscretizedSystem {
  SpatialGrid grid;
  ControlGrid controls;
  std::vector<Vec2> dynamics;  // f(x_i, u_j) per structural column

  using Dynamics = std::function<Vec2(Vec2 x, Vec2 u)>;

  /// f(x, u) = u unless another field is given.
  static DiscretizedSystem make(SpatialGrid grid, ControlGrid controls, const Dynamics& f = {});

  std::size_t columns() const { return dynamics.size(); }
  std::size_t cell_of(std::size_t col) const { return col / controls.size(); }
  std::size_t control_of(std::size_t col) const { return col % controls.size(); }
  Vec2 state(std::size_t col) const { return grid.cells[cell_of(col)]; }
  Vec2 control(std::size_t col) const { return controls.directions[control_of(col)]; }
};

enum class Sense : std::uint8_t { minimize, maximize };

struct AveragedConstraint {
  Expr expr;
  lp::RowSense sense = lp::RowSense::le;
};

struct AssembleOptions {
  /// Skip the q > 0 check (weaker denominator hypothesis, checked post hoc
  /// by the caller instead).
  bool allow_nonpositive_q = false;
};

class MeasureLP {
 public:
  /// Throws PreconditionError when N < 1 or a q sample is <= 0 (naming the
  /// cell), EvalError from the integrands.
  static MeasureLP assemble(DiscretizedSystem system, const Integrand& p, const Integrand& q,
                            std::vector<AveragedConstraint> constraints, int test_degree = 8,
                            const AssembleOptions& options = {});

  const DiscretizedSystem& system() const { return system_; }
  std::size_t columns() const { return system_.columns(); }
  std::size_t test_count() const { return monomials_.size(); }
  std::size_t constraint_count() const { return constraints_.size(); }
  /// Normalization + stationarity + constraint rows.
  std::size_t rows() const { return 1 + test_count() + constraint_count(); }
  int test_degree() const { return degree_; }
  const std::vector<std::pair<int, int>>& monomials() const { return monomials_; }

  const Integrand& p() const { return p_; }
  const Integrand& q() const { return q_; }
  const std::vector<AveragedConstraint>& constraints() const { return constraints_; }
  std::span<const double> p_values() const { return pv_; }
  std::span<const double> q_values() const { return qv_; }
  std::span<const double> constraint_values(std::size_t k) const { return cv_[k]; }

  /// grad phi_k(x_cell) . f for structural column `col`.
  double stationarity_entry(std::size_t col, std::size_t k) const;

  /// Fills out[r] for the normalization, stationarity and constraint rows.
  void column(std::size_t col, std::span<double> out) const;

  /// g evaluated at every structural column.
  std::vector<double> sample(const Integrand& g) const;

  /// Dense copy with the given structural cost and slack columns appended;
  /// meant for small instances.
  lp::StandardLP to_standard_lp(std::span<const double> cost) const;

 private:
  DiscretizedSystem system_;
  Integrand p_{Expr::parse("0")};
  Integrand q_{Expr::parse("1")};
  std::vector<AveragedConstraint> constraints_;
  int degree_ = 0;
  std::vector<std::pair<int, int>> monomials_;
  std::vector<double> gx_;  // cells x n_test, d phi / d x1
  std::vector<double> gy_;  // cells x n_test, d phi / d x2
  std::vector<double> pv_;
  std::vector<double> qv_;
  std::vector<std::vector<double>> cv_;
  std::vector<std::size_t> slack_rows_;  // constraint index of each slack column
  friend class MeasureProgram;
};

/// An equality row mu(g) = rhs appended after the constraint rows.
struct PinnedRow {
  std::vector<double> values;  // per structural column
  double rhs = 0.0;
};

/// MeasureLP as an LP column source with a caller-chosen cost. Holds
/// references: `lp`, `cost` and `pins` must outlive the program.
class MeasureProgram final : public lp::ColumnSource {
 public:
  MeasureProgram(const MeasureLP& lp, std::span<const double> cost, std::span<const PinnedRow> pins = {});

  std::size_t rows() const override { return lp_.rows() + pins_.size(); }
  std::size_t cols() const override { return lp_.columns() + lp_.slack_rows_.size(); }
  std::span<const double> rhs() const override { return rhs_; }
  double cost(std::size_t j) const override { return j < cost_.size() ? cost_[j] : 0.0; }
  void column(std::size_t j, std::span<double> out) const override;
  void price(std::span<const double> y, double cost_weight, std::span<double> d) const override;

 private:
  const MeasureLP& lp_;
  std::span<const double> cost_;
  std::span<const PinnedRow> pins_;
  std::vector<double> rhs_;
};

struct OptimalMeasure {
  std::vector<double> weights;              // per structural column
  std::vector<std::size_t> support;         // columns above the threshold
  std::vector<double> cell_mass;            // per spatial cell
  std::vector<Vec2> conditional_controls;   // per spatial cell, zero where empty
  double mu_p = 0.0;
  double mu_q = 0.0;
  std::vector<double> mu_constraints;

  /// Spatial cells carrying support, ascending.
  std::vector<std::size_t> support_cells(const DiscretizedSystem& system) const;
};

/// Builds the measure from LP weights (slack entries, if any, are dropped).
/// The support keeps weights > threshold * max weight.
OptimalMeasure make_measure(const MeasureLP& lp, std::span<const double> weights,
                            double support_threshold = 1e-7);

/// sum_j w_j g(x_j, u_j).
double realization_point(const OptimalMeasure& m, const DiscretizedSystem& system, const Integrand& g);

/// max |A w - b| over the normalization and stationarity rows.
double stationarity_residual(const MeasureLP& lp, std::span<const double> weights);

}  // namespace occm
