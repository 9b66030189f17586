#include "occm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "occm/error.hpp"

namespace occm {

DiscretizedSystem DiscretizedSystem::make(SpatialGrid grid, ControlGrid controls, const Dynamics& f) {
  if (grid.cells.empty() || controls.size() == 0) throw PreconditionError("discretized system has no columns");
  DiscretizedSystem s;
  s.grid = std::move(grid);
  s.controls = std::move(controls);
  const std::size_t nu = s.controls.size();
  s.dynamics.resize(s.grid.cells.size() * nu);
  for (std::size_t i = 0; i < s.grid.cells.size(); ++i) {
    for (std::size_t j = 0; j < nu; ++j) {
      const Vec2 u = s.controls.directions[j];
      const Vec2 v = f ? f(s.grid.cells[i], u) : u;
      if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw PreconditionError("dynamics are not finite");
      s.dynamics[i * nu + j] = v;
    }
  }
  return s;
}

Integrand::Integrand(const Expr& e)
    : label_(e.to_string()), fn_([e](Vec2 x, Vec2 u) { return e.evaluate(x, u); }), expr_(e) {}

MeasureLP MeasureLP::assemble(DiscretizedSystem system, const Integrand& p, const Integrand& q,
                              std::vector<AveragedConstraint> constraints, int test_degree,
                              const AssembleOptions& options) {
  if (test_degree < 1) throw PreconditionError("test degree must be at least 1");
  MeasureLP lp;
  lp.system_ = std::move(system);
  lp.p_ = p;
  lp.q_ = q;
  lp.constraints_ = std::move(constraints);
  lp.degree_ = test_degree;
  for (int d = 1; d <= test_degree; ++d) {
    for (int a = 0; a <= d; ++a) lp.monomials_.emplace_back(a, d - a);
  }

  const DiscretizedSystem& sys = lp.system_;
  const BoundingBox& box = sys.grid.box;
  const Vec2 c = box.center();
  const Vec2 s = box.half_extent();
  const std::size_t nt = lp.monomials_.size();
  const std::size_t ncell = sys.grid.cells.size();
  lp.gx_.resize(ncell * nt);
  lp.gy_.resize(ncell * nt);
  std::vector<double> px(static_cast<std::size_t>(test_degree) + 1);
  std::vector<double> py(px.size());
  for (std::size_t i = 0; i < ncell; ++i) {
    const double xh = (sys.grid.cells[i].x - c.x) / s.x;
    const double yh = (sys.grid.cells[i].y - c.y) / s.y;
    px[0] = py[0] = 1.0;
    for (std::size_t e = 1; e < px.size(); ++e) {
      px[e] = px[e - 1] * xh;
      py[e] = py[e - 1] * yh;
    }
    for (std::size_t k = 0; k < nt; ++k) {
      const auto [a, b] = lp.monomials_[k];
      lp.gx_[i * nt + k] = a > 0 ? a * px[static_cast<std::size_t>(a - 1)] * py[static_cast<std::size_t>(b)] / s.x : 0.0;
      lp.gy_[i * nt + k] = b > 0 ? b * px[static_cast<std::size_t>(a)] * py[static_cast<std::size_t>(b - 1)] / s.y : 0.0;
    }
  }

  lp.pv_ = lp.sample(p);
  lp.qv_ = lp.sample(q);
  if (!options.allow_nonpositive_q) {
    for (std::size_t j = 0; j < lp.qv_.size(); ++j) {
      if (lp.qv_[j] > 0.0) continue;
      const Vec2 x = sys.state(j);
      const Vec2 u = sys.control(j);
      std::ostringstream msg;
      msg << "q must be positive: q = " << lp.qv_[j] << " at cell " << sys.cell_of(j) << " (" << x.x << ", " << x.y
          << "), control (" << u.x << ", " << u.y << ")";
      throw PreconditionError(msg.str());
    }
  }
  for (std::size_t k = 0; k < lp.constraints_.size(); ++k) {
    lp.cv_.push_back(lp.sample(lp.constraints_[k].expr));
    if (lp.constraints_[k].sense == lp::RowSense::le) lp.slack_rows_.push_back(k);
  }
  return lp;
}

std::vector<double> MeasureLP::sample(const Integrand& g) const {
  std::vector<double> out(columns());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = g(system_.state(j), system_.control(j));
  return out;
}

double MeasureLP::stationarity_entry(std::size_t col, std::size_t k) const {
  const std::size_t i = system_.cell_of(col);
  const Vec2 f = system_.dynamics[col];
  const std::size_t nt = test_count();
  return gx_[i * nt + k] * f.x + gy_[i * nt + k] * f.y;
}

void MeasureLP::column(std::size_t col, std::span<double> out) const {
  out[0] = 1.0;
  const std::size_t nt = test_count();
  const std::size_t i = system_.cell_of(col);
  const Vec2 f = system_.dynamics[col];
  const double* gx = gx_.data() + i * nt;
  const double* gy = gy_.data() + i * nt;
  for (std::size_t k = 0; k < nt; ++k) out[1 + k] = gx[k] * f.x + gy[k] * f.y;
  for (std::size_t k = 0; k < cv_.size(); ++k) out[1 + nt + k] = cv_[k][col];
}

lp::StandardLP MeasureLP::to_standard_lp(std::span<const double> cost) const {
  const std::size_t n = columns();
  lp::StandardLP out(rows(), n + slack_rows_.size());
  std::vector<double> col(rows());
  for (std::size_t j = 0; j < n; ++j) {
    column(j, col);
    for (std::size_t r = 0; r < col.size(); ++r) out.a(r, j) = col[r];
    out.c()[j] = cost[j];
  }
  for (std::size_t s = 0; s < slack_rows_.size(); ++s) {
    out.a(1 + test_count() + slack_rows_[s], n + s) = 1.0;
    out.kinds()[n + s] = lp::ColumnKind::slack;
  }
  out.b()[0] = 1.0;
  return out;
}

MeasureProgram::MeasureProgram(const MeasureLP& lp, std::span<const double> cost, std::span<const PinnedRow> pins)
    : lp_(lp), cost_(cost), pins_(pins) {
  if (cost.size() != lp.columns()) throw PreconditionError("cost vector does not match the column count");
  rhs_.assign(rows(), 0.0);
  rhs_[0] = 1.0;
  for (std::size_t k = 0; k < pins.size(); ++k) {
    if (pins[k].values.size() != lp.columns()) throw PreconditionError("pinned row does not match the column count");
    rhs_[lp.rows() + k] = pins[k].rhs;
  }
}

void MeasureProgram::column(std::size_t j, std::span<double> out) const {
  const std::size_t n = lp_.columns();
  if (j >= n) {
    std::fill(out.begin(), out.end(), 0.0);
    out[1 + lp_.test_count() + lp_.slack_rows_[j - n]] = 1.0;
    return;
  }
  lp_.column(j, out.first(lp_.rows()));
  for (std::size_t k = 0; k < pins_.size(); ++k) out[lp_.rows() + k] = pins_[k].values[j];
}

void MeasureProgram::price(std::span<const double> y, double cost_weight, std::span<double> d) const {
  const DiscretizedSystem& sys = lp_.system_;
  const std::size_t nt = lp_.test_count();
  const std::size_t nu = sys.controls.size();
  const std::size_t ncell = sys.grid.cells.size();
  const std::size_t first_constraint = 1 + nt;
  const std::size_t first_pin = lp_.rows();

  for (std::size_t i = 0; i < ncell; ++i) {
    double sx = 0.0;
    double sy = 0.0;
    const double* gx = lp_.gx_.data() + i * nt;
    const double* gy = lp_.gy_.data() + i * nt;
    for (std::size_t k = 0; k < nt; ++k) {
      sx += y[1 + k] * gx[k];
      sy += y[1 + k] * gy[k];
    }
    for (std::size_t u = 0; u < nu; ++u) {
      const std::size_t j = i * nu + u;
      const Vec2 f = sys.dynamics[j];
      d[j] = cost_weight * cost_[j] - y[0] - sx * f.x - sy * f.y;
    }
  }
  for (std::size_t k = 0; k < lp_.cv_.size(); ++k) {
    const double yk = y[first_constraint + k];
    if (yk == 0.0) continue;
    const auto& v = lp_.cv_[k];
    for (std::size_t j = 0; j < v.size(); ++j) d[j] -= yk * v[j];
  }
  for (std::size_t k = 0; k < pins_.size(); ++k) {
    const double yk = y[first_pin + k];
    if (yk == 0.0) continue;
    const auto& v = pins_[k].values;
    for (std::size_t j = 0; j < v.size(); ++j) d[j] -= yk * v[j];
  }
  const std::size_t n = lp_.columns();
  for (std::size_t s = 0; s < lp_.slack_rows_.size(); ++s) d[n + s] = -y[first_constraint + lp_.slack_rows_[s]];
}

std::vector<std::size_t> OptimalMeasure::support_cells(const DiscretizedSystem& system) const {
  std::vector<std::size_t> cells;
  for (std::size_t j : support) cells.push_back(system.cell_of(j));
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

OptimalMeasure make_measure(const MeasureLP& lp, std::span<const double> weights, double support_threshold) {
  const DiscretizedSystem& sys = lp.system();
  const std::size_t n = lp.columns();
  if (weights.size() < n) throw PreconditionError("weight vector is shorter than the column count");
  OptimalMeasure m;
  m.weights.assign(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(n));
  double wmax = 0.0;
  for (double& w : m.weights) {
    w = std::max(w, 0.0);
    wmax = std::max(wmax, w);
  }
  const double cut = support_threshold * wmax;
  m.cell_mass.assign(sys.grid.cells.size(), 0.0);
  m.conditional_controls.assign(sys.grid.cells.size(), Vec2{});
  m.mu_constraints.assign(lp.constraint_count(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = m.weights[j];
    if (w == 0.0) continue;
    if (w > cut) m.support.push_back(j);
    const std::size_t i = sys.cell_of(j);
    m.cell_mass[i] += w;
    m.conditional_controls[i] += sys.control(j) * w;
    m.mu_p += w * lp.p_values()[j];
    m.mu_q += w * lp.q_values()[j];
    for (std::size_t k = 0; k < lp.constraint_count(); ++k) m.mu_constraints[k] += w * lp.constraint_values(k)[j];
  }
  for (std::size_t i = 0; i < m.cell_mass.size(); ++i) {
    if (m.cell_mass[i] > 0.0) m.conditional_controls[i] = m.conditional_controls[i] * (1.0 / m.cell_mass[i]);
  }
  return m;
}

double realization_point(const OptimalMeasure& m, const DiscretizedSystem& system, const Integrand& g) {
  double s = 0.0;
  for (std::size_t j = 0; j < m.weights.size(); ++j) {
    if (m.weights[j] != 0.0) s += m.weights[j] * g(system.state(j), system.control(j));
  }
  return s;
}

double stationarity_residual(const MeasureLP& lp, std::span<const double> weights) {
  const std::size_t rows = 1 + lp.test_count();
  std::vector<double> acc(rows, 0.0);
  acc[0] = -1.0;
  std::vector<double> col(lp.rows());
  for (std::size_t j = 0; j < lp.columns(); ++j) {
    if (weights[j] == 0.0) continue;
    lp.column(j, col);
    for (std::size_t r = 0; r < rows; ++r) acc[r] += col[r] * weights[j];
  }
  double worst = 0.0;
  for (double v : acc) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace occm
