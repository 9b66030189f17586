#include "occm/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "occm/error.hpp"

namespace occm::lp {

void ColumnSource::price(std::span<const double> y, double cost_weight, std::span<double> d) const {
  std::vector<double> col(rows());
  for (std::size_t j = 0; j < cols(); ++j) {
    column(j, col);
    double s = cost_weight == 0.0 ? 0.0 : cost_weight * cost(j);
    for (std::size_t i = 0; i < col.size(); ++i) s -= y[i] * col[i];
    d[j] = s;
  }
}

StandardLP::StandardLP(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), a_(rows * cols, 0.0), b_(rows, 0.0), c_(cols, 0.0),
      kind_(cols, ColumnKind::structural) {}

void StandardLP::column(std::size_t j, std::span<double> out) const {
  for (std::size_t i = 0; i < rows_; ++i) out[i] = a_[i * cols_ + j];
}

void StandardLP::price(std::span<const double> y, double cost_weight, std::span<double> d) const {
  for (std::size_t j = 0; j < cols_; ++j) d[j] = cost_weight * c_[j];
  for (std::size_t i = 0; i < rows_; ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    const double* row = a_.data() + i * cols_;
    for (std::size_t j = 0; j < cols_; ++j) d[j] -= yi * row[j];
  }
}

std::size_t StandardLP::add_column(std::span<const double> entries, double cost, ColumnKind kind) {
  std::vector<double> grown(rows_ * (cols_ + 1));
  for (std::size_t i = 0; i < rows_; ++i) {
    std::copy_n(a_.begin() + static_cast<std::ptrdiff_t>(i * cols_), cols_,
                grown.begin() + static_cast<std::ptrdiff_t>(i * (cols_ + 1)));
    grown[i * (cols_ + 1) + cols_] = entries[i];
  }
  a_ = std::move(grown);
  c_.push_back(cost);
  kind_.push_back(kind);
  return cols_++;
}

std::size_t StandardLP::add_row(std::span<const double> entries, double rhs) {
  a_.insert(a_.end(), entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(cols_));
  b_.push_back(rhs);
  return rows_++;
}

double primal_residual(const ColumnSource& lp, std::span<const double> w) {
  std::vector<double> acc(lp.rhs().begin(), lp.rhs().end());
  for (double& v : acc) v = -v;
  std::vector<double> col(lp.rows());
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    if (w[j] == 0.0) continue;
    lp.column(j, col);
    for (std::size_t i = 0; i < col.size(); ++i) acc[i] += col[i] * w[j];
  }
  double worst = 0.0;
  for (double v : acc) worst = std::max(worst, std::abs(v));
  return worst;
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

class RevisedSimplex {
 public:
  RevisedSimplex(const ColumnSource& src, const Options& opt)
      : src_(src), opt_(opt), m_(src.rows()), n_(src.cols()) {
    sign_.resize(m_);
    bprime_.resize(m_);
    const auto b = src.rhs();
    for (std::size_t i = 0; i < m_; ++i) {
      if (!std::isfinite(b[i])) throw PreconditionError("LP right-hand side is not finite");
      sign_[i] = b[i] < 0.0 ? -1.0 : 1.0;
      bprime_[i] = std::abs(b[i]);
    }
    bland_after_ = opt.bland_after != 0 ? opt.bland_after : 5 * (m_ + n_);
    in_basis_.assign(n_, 0);
    d_.resize(n_);
    y_.resize(m_);
    ys_.resize(m_);
    alpha_.resize(m_);
    col_.resize(m_);
  }

  Solution run(std::span<const std::size_t> warm) {
    Solution sol;
    bool warm_ok = false;
    if (warm.size() == m_ && m_ > 0) warm_ok = try_warm_start(warm);
    if (!warm_ok) {
      cold_start();
      const Status s1 = iterate(1);
      sol.phase1_iterations = iterations_;
      if (s1 != Status::optimal || phase_objective(1) > opt_.feasibility_tol * (1.0 + max_abs_b())) {
        sol.status = Status::infeasible;
        finish(sol);
        return sol;
      }
      drive_out_artificials();
    }
    sol.status = iterate(2);
    finish(sol);
    return sol;
  }

 private:
  double max_abs_b() const {
    double v = 0.0;
    for (double b : bprime_) v = std::max(v, b);
    return v;
  }

  void column_prime(std::size_t j, std::span<double> out) const {
    if (j >= n_) {
      std::fill(out.begin(), out.end(), 0.0);
      out[j - n_] = 1.0;
      return;
    }
    src_.column(j, out);
    for (std::size_t i = 0; i < m_; ++i) out[i] *= sign_[i];
  }

  double cost_in_phase(std::size_t j, int phase) const {
    if (phase == 1) return j >= n_ ? 1.0 : 0.0;
    return j >= n_ ? 0.0 : src_.cost(j);
  }

  double phase_objective(int phase) const {
    double obj = 0.0;
    for (std::size_t i = 0; i < m_; ++i) obj += cost_in_phase(basis_[i], phase) * xb_[i];
    return obj;
  }

  void set_basis(std::vector<std::size_t> basis) {
    std::fill(in_basis_.begin(), in_basis_.end(), 0);
    basis_ = std::move(basis);
    for (std::size_t j : basis_) {
      if (j < n_) in_basis_[j] = 1;
    }
  }

  void cold_start() {
    std::vector<std::size_t> basis(m_);
    for (std::size_t i = 0; i < m_; ++i) basis[i] = n_ + i;
    set_basis(std::move(basis));
    bmat_ = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    binv_ = bmat_;
    xb_ = bprime_;
    pivots_since_refactor_ = 0;
  }

  bool try_warm_start(std::span<const std::size_t> warm) {
    std::vector<std::size_t> basis(warm.begin(), warm.end());
    for (std::size_t j : basis) {
      if (j >= n_) return false;
    }
    auto sorted = basis;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
    set_basis(std::move(basis));
    if (!refactor()) return false;
    for (double v : xb_) {
      if (v < -opt_.feasibility_tol * (1.0 + max_abs_b())) return false;
    }
    for (double& v : xb_) v = std::max(v, 0.0);
    return true;
  }

  // Rebuilds B and its inverse from the basis; false when singular.
  bool refactor() {
    const auto m = static_cast<Eigen::Index>(m_);
    bmat_.resize(m, m);
    for (std::size_t k = 0; k < m_; ++k) {
      column_prime(basis_[k], col_);
      for (std::size_t i = 0; i < m_; ++i) bmat_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = col_[i];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bmat_);
    if (!lu.isInvertible()) return false;
    binv_ = lu.inverse();
    Eigen::Map<const Eigen::VectorXd> b(bprime_.data(), m);
    Eigen::VectorXd x = binv_ * b;
    xb_.assign(x.data(), x.data() + m);
    pivots_since_refactor_ = 0;
    return true;
  }

  // Keeps the columns LU finds independent and covers the remaining rows
  // with their artificials.
  bool repair_basis() {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bmat_);
    const auto rank = static_cast<std::size_t>(lu.rank());
    const auto& cols = lu.permutationQ().indices();
    const auto& rows = lu.permutationP().indices();
    std::vector<std::size_t> next(m_);
    std::vector<char> keep(m_, 0);
    for (std::size_t k = 0; k < rank; ++k) keep[static_cast<std::size_t>(cols[static_cast<Eigen::Index>(k)])] = 1;
    std::vector<std::size_t> free_rows;
    for (std::size_t k = rank; k < m_; ++k) {
      // permutationP maps original rows to pivot positions.
      for (std::size_t i = 0; i < m_; ++i) {
        if (static_cast<std::size_t>(rows[static_cast<Eigen::Index>(i)]) == k) free_rows.push_back(i);
      }
    }
    std::size_t f = 0;
    for (std::size_t k = 0; k < m_; ++k) {
      if (keep[k]) continue;
      if (basis_[k] < n_) in_basis_[basis_[k]] = 0;
      basis_[k] = n_ + free_rows[f++];
    }
    return refactor();
  }

  double basis_residual() const {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::Map<const Eigen::VectorXd> x(xb_.data(), m);
    Eigen::Map<const Eigen::VectorXd> b(bprime_.data(), m);
    return (bmat_ * x - b).cwiseAbs().maxCoeff();
  }

  void compute_duals(int phase) {
    for (std::size_t k = 0; k < m_; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double cb = cost_in_phase(basis_[i], phase);
        if (cb != 0.0) s += cb * binv_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      }
      y_[k] = s;
      ys_[k] = s * sign_[k];
    }
  }

  void ftran(std::size_t j) {
    column_prime(j, col_);
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < m_; ++k) s += binv_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * col_[k];
      alpha_[i] = s;
    }
  }

  void pivot(std::size_t r, std::size_t q, double theta) {
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      xb_[i] -= theta * alpha_[i];
      if (xb_[i] < 0.0 && xb_[i] > -opt_.feasibility_tol) xb_[i] = 0.0;
    }
    xb_[r] = theta;

    const auto ri = static_cast<Eigen::Index>(r);
    const double inv = 1.0 / alpha_[r];
    binv_.row(ri) *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || alpha_[i] == 0.0) continue;
      binv_.row(static_cast<Eigen::Index>(i)) -= alpha_[i] * binv_.row(ri);
    }
    for (std::size_t i = 0; i < m_; ++i) bmat_(static_cast<Eigen::Index>(i), ri) = col_[i];

    if (basis_[r] < n_) in_basis_[basis_[r]] = 0;
    basis_[r] = q;
    in_basis_[q] = 1;

    ++pivots_since_refactor_;
    if (pivots_since_refactor_ >= opt_.refactor_every || basis_residual() > opt_.refactor_residual) {
      if (!refactor() && !repair_basis()) throw Error("numerical", "simplex basis became singular");
      for (double& v : xb_) {
        if (v < 0.0 && v > -opt_.feasibility_tol) v = 0.0;
      }
    }
  }

  std::size_t choose_entering(bool bland) const {
    std::size_t best = kNone;
    double best_d = -opt_.optimality_tol;
    for (std::size_t j = 0; j < n_; ++j) {
      if (in_basis_[j]) continue;
      if (d_[j] < best_d) {
        best = j;
        if (bland) return j;
        best_d = d_[j];
      }
    }
    return best;
  }

  // Minimum ratio row; ties go to the largest pivot, or to the lowest basic
  // column index under Bland's rule. In phase 2 basic artificials block any
  // move that would make them nonzero.
  std::size_t choose_leaving(int phase, bool bland, double& theta) const {
    std::size_t best = kNone;
    theta = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m_; ++i) {
      double ratio;
      if (phase == 2 && basis_[i] >= n_) {
        if (std::abs(alpha_[i]) <= opt_.pivot_tol) continue;
        ratio = 0.0;
      } else {
        if (alpha_[i] <= opt_.pivot_tol) continue;
        ratio = std::max(xb_[i], 0.0) / alpha_[i];
      }
      if (best == kNone || ratio < theta - 1e-12 * std::max(1.0, theta)) {
        best = i;
        theta = ratio;
      } else if (ratio <= theta + 1e-12 * std::max(1.0, theta) &&
                 (bland ? basis_[i] < basis_[best] : std::abs(alpha_[i]) > std::abs(alpha_[best]))) {
        best = i;
        theta = std::min(theta, ratio);
      }
    }
    return best;
  }

  Status iterate(int phase) {
    bool bland = false;
    double best_obj = phase_objective(phase);
    std::size_t stall = 0;
    for (;;) {
      if (iterations_ >= opt_.max_iterations) {
        throw NoConvergenceError("simplex iteration cap of " + std::to_string(opt_.max_iterations) + " exceeded",
                                 phase_objective(phase));
      }
      compute_duals(phase);
      src_.price(ys_, phase == 1 ? 0.0 : 1.0, d_);
      const std::size_t q = choose_entering(bland);
      if (q == kNone) return Status::optimal;
      ftran(q);
      double theta = 0.0;
      const std::size_t r = choose_leaving(phase, bland, theta);
      if (r == kNone) return Status::unbounded;
      pivot(r, q, theta);
      ++iterations_;

      const double obj = phase_objective(phase);
      if (obj < best_obj - 1e-12 * (1.0 + std::abs(best_obj))) {
        best_obj = obj;
        stall = 0;
      } else if (++stall >= bland_after_ && !bland) {
        bland = true;
        used_bland_ = true;
      }
    }
  }

  void drive_out_artificials() {
    std::vector<double> z(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      for (std::size_t k = 0; k < m_; ++k) {
        z[k] = binv_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) * sign_[k];
      }
      src_.price(z, 0.0, d_);  // d_j = -(B^-1 A)_rj
      std::size_t best = kNone;
      double best_abs = 1e-9;
      for (std::size_t j = 0; j < n_; ++j) {
        if (in_basis_[j]) continue;
        if (std::abs(d_[j]) > best_abs) {
          best_abs = std::abs(d_[j]);
          best = j;
        }
      }
      if (best == kNone) continue;  // redundant row
      ftran(best);
      pivot(r, best, xb_[r] / alpha_[r]);
    }
  }

  void finish(Solution& sol) {
    sol.basis = basis_;
    sol.primal.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) sol.primal[basis_[i]] = std::max(xb_[i], 0.0);
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (sol.primal[j] != 0.0) obj += src_.cost(j) * sol.primal[j];
    }
    sol.objective = obj;
    if (sol.status == Status::optimal) {
      compute_duals(2);
      sol.duals.resize(m_);
      for (std::size_t k = 0; k < m_; ++k) sol.duals[k] = ys_[k];
    }
    sol.iterations = iterations_;
    sol.used_bland = used_bland_;
  }

  const ColumnSource& src_;
  Options opt_;
  std::size_t m_;
  std::size_t n_;
  std::vector<double> sign_;
  std::vector<double> bprime_;
  std::vector<std::size_t> basis_;
  std::vector<std::uint8_t> in_basis_;
  Eigen::MatrixXd bmat_;
  Eigen::MatrixXd binv_;
  std::vector<double> xb_;
  std::vector<double> d_;
  std::vector<double> y_;
  std::vector<double> ys_;
  std::vector<double> alpha_;
  std::vector<double> col_;
  std::size_t iterations_ = 0;
  std::size_t pivots_since_refactor_ = 0;
  std::size_t bland_after_ = 0;
  bool used_bland_ = false;
};

}  // namespace

Solution solve(const ColumnSource& lp, const Options& options, std::span<const std::size_t> warm_basis) {
  RevisedSimplex simplex(lp, options);
  return simplex.run(warm_basis);
}

Solution solve_with_extra_rows(const StandardLP& lp, std::span<const ExtraRow> extra, const Options& options) {
  StandardLP aug = lp;
  const std::size_t base_cols = lp.cols();
  std::vector<double> row(base_cols);
  for (const ExtraRow& r : extra) {
    if (r.coeffs.size() != base_cols) throw PreconditionError("extra row has the wrong number of coefficients");
    row.assign(r.coeffs.begin(), r.coeffs.end());
    row.resize(aug.cols(), 0.0);  // earlier slacks do not appear in this row
    const std::size_t idx = aug.add_row(row, r.rhs);
    if (r.sense == RowSense::le) {
      std::vector<double> slack(aug.rows(), 0.0);
      slack[idx] = 1.0;
      aug.add_column(slack, 0.0, ColumnKind::slack);
    }
  }
  Solution sol = solve(aug, options);
  sol.primal.resize(base_cols);
  return sol;
}

}  // namespace occm::lp
