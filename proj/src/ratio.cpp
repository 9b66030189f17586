#include "occm/ratio.hpp"

#include <cmath>
#include <sstream>

#include "occm/error.hpp"

namespace occm {

namespace {

double dot_weights(std::span<const double> values, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (w[j] != 0.0) s += values[j] * w[j];
  }
  return s;
}

std::string trace_text(const std::vector<DinkelbachStep>& trace) {
  std::ostringstream out;
  out.precision(12);
  for (std::size_t t = 0; t < trace.size(); ++t) out << (t ? "; " : "") << "v=" << trace[t].v << " r=" << trace[t].residual;
  return out.str();
}

}  // namespace

RatioSolution solve_ratio(const MeasureLP& lp, const RatioOptions& options, std::span<const PinnedRow> pins) {
  const double s = options.sense == Sense::maximize ? -1.0 : 1.0;
  const auto p = lp.p_values();
  const auto q = lp.q_values();
  const std::size_t n = lp.columns();

  RatioSolution out;
  std::vector<double> cost(n, 0.0);
  MeasureProgram program(lp, cost, pins);
  out.lp_rows = program.rows();

  lp::Solution sol = lp::solve(program, options.lp);
  ++out.lp_solves;
  out.simplex_iterations += sol.iterations;
  if (sol.status == lp::Status::infeasible) throw InfeasibleError("constraint rows admit no measure");

  auto ratio_of = [&](const std::vector<double>& w) {
    const double mq = dot_weights(q, w);
    if (!(mq > 0.0)) throw PreconditionError("mu(q) is not positive on a feasible measure");
    return s * dot_weights(p, w) / mq;
  };

  double v = ratio_of(sol.primal);  // in the minimized (sign-adjusted) sense
  const double slack = 1e-9;
  for (int t = 0;; ++t) {
    if (t >= options.max_iterations) {
      throw NoConvergenceError("Dinkelbach did not converge in " + std::to_string(options.max_iterations) +
                                   " iterations: " + trace_text(out.trace),
                               s * v);
    }
    for (std::size_t j = 0; j < n; ++j) cost[j] = s * p[j] - v * q[j];
    const auto warm = sol.basis;
    sol = lp::solve(program, options.lp, warm);
    ++out.lp_solves;
    out.simplex_iterations += sol.iterations;
    if (sol.status != lp::Status::optimal) throw Error("numerical", "ratio subproblem lost feasibility");
    const double r = sol.objective;
    out.trace.push_back({s * v, r});
    if (r > slack * (1.0 + std::abs(v))) {
      throw Error("numerical", "Dinkelbach residual became positive: " + trace_text(out.trace));
    }
    const double next = ratio_of(sol.primal);
    if (next > v + slack * (1.0 + std::abs(v))) {
      throw Error("numerical", "Dinkelbach ratio increased: " + trace_text(out.trace));
    }
    if (std::abs(r) <= options.tolerance) break;
    v = next;
  }

  out.measure = make_measure(lp, sol.primal, options.support_threshold);
  out.value = out.measure.mu_p / out.measure.mu_q;
  out.basis = sol.basis;
  out.active.resize(lp.constraint_count());
  for (std::size_t k = 0; k < lp.constraint_count(); ++k) {
    out.active[k] = lp.constraints()[k].sense == lp::RowSense::eq || out.measure.mu_constraints[k] >= -1e-8;
  }
  return out;
}

std::pair<double, double> feasible_range(const MeasureLP& lp, const Expr& g, const lp::Options& options) {
  std::vector<double> cost = lp.sample(g);
  MeasureProgram program(lp, cost);
  const lp::Solution lo = lp::solve(program, options);
  if (lo.status != lp::Status::optimal) throw InfeasibleError("constraint rows admit no measure");
  for (double& c : cost) c = -c;
  const lp::Solution hi = lp::solve(program, options, lo.basis);
  return {lo.objective, -hi.objective};
}

SweepResult pinned_sweep(const MeasureLP& lp, std::span<const Pin> pins, const SweepObjective& objective,
                         const SweepOptions& options) {
  std::vector<PinnedRow> rows(pins.size());
  std::vector<std::vector<double>> lattice(pins.size());
  for (std::size_t k = 0; k < pins.size(); ++k) {
    rows[k].values = lp.sample(pins[k].expr);
    lattice[k] = pins[k].values;
    if (lattice[k].empty()) {
      const auto [lo, hi] = feasible_range(lp, pins[k].expr, options.ratio.lp);
      const std::size_t m = std::max<std::size_t>(options.default_points, 1);
      for (std::size_t i = 0; i < m; ++i) {
        lattice[k].push_back(m == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1));
      }
    }
  }

  SweepResult best;
  bool found = false;
  std::vector<std::size_t> idx(pins.size(), 0);
  for (;;) {
    SweepPoint point;
    for (std::size_t k = 0; k < pins.size(); ++k) {
      point.pinned.push_back(lattice[k][idx[k]]);
      rows[k].rhs = point.pinned.back();
    }
    try {
      RatioSolution sol = solve_ratio(lp, options.ratio, rows);
      point.feasible = true;
      point.value = objective(point.pinned, sol.measure.mu_p, sol.measure.mu_q);
      // Ties within round-off keep the earlier lattice point.
      const double margin = 1e-9 * (1.0 + std::abs(best.value));
      const bool better = !found || (options.select == Sense::minimize ? point.value < best.value - margin
                                                                          : point.value > best.value + margin);
      if (better) {
        found = true;
        best.value = point.value;
        best.pinned = point.pinned;
        best.solution = std::move(sol);
      }
    } catch (const InfeasibleError&) {
      point.feasible = false;
    }
    best.points.push_back(std::move(point));

    bool done = true;
    for (std::size_t k = pins.size(); k-- > 0;) {
      if (++idx[k] < lattice[k].size()) {
        done = false;
        break;
      }
      idx[k] = 0;
    }
    if (done) break;
  }
  if (!found) throw InfeasibleError("every lattice point of the sweep is infeasible");
  return best;
}

}  // namespace occm
