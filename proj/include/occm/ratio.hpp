#pragma once

// Fractional objectives mu(p) / mu(q) over the measure LP (Dinkelbach), and
// the pinned-average sweep for objectives that are not ratios.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "occm/lp.hpp"
#include "occm/measure.hpp"

namespace occm {

struct RatioOptions {
  Sense sense = Sense::minimize;
  double tolerance = 1e-9;  // on the Dinkelbach residual
  int max_iterations = 50;
  double support_threshold = 1e-7;
  lp::Options lp;
};

struct DinkelbachStep {
  double v = 0.0;         // ratio in the caller's sense
  double residual = 0.0;  // optimum of min (s p - v' q), s = -1 when maximizing
};

struct RatioSolution {
  double value = 0.0;
  OptimalMeasure measure;
  std::vector<DinkelbachStep> trace;
  std::vector<bool> active;  // per averaged constraint
  std::size_t lp_rows = 0;
  std::size_t lp_solves = 0;
  std::size_t simplex_iterations = 0;
  std::vector<std::size_t> basis;
};

/// Throws InfeasibleError when the constraint rows admit no measure,
/// NoConvergenceError when the iteration cap is hit, and Error("numerical")
/// if the residuals break Dinkelbach monotonicity.
RatioSolution solve_ratio(const MeasureLP& lp, const RatioOptions& options = {},
                          std::span<const PinnedRow> pins = {});

struct Pin {
  Expr expr;
  /// Lattice of pinned values; empty means `default_points` evenly spaced
  /// values over the feasible range of mu(expr).
  std::vector<double> values;
};

/// V(pinned values, mu(p), mu(q)).
using SweepObjective = std::function<double(std::span<const double> pinned, double mu_p, double mu_q)>;

struct SweepOptions {
  RatioOptions ratio;             // sense of the inner LP at each lattice point
  Sense select = Sense::minimize; // which V extreme to report
  std::size_t default_points = 41;
};

struct SweepPoint {
  std::vector<double> pinned;
  bool feasible = false;
  double value = 0.0;
};

struct SweepResult {
  double value = 0.0;
  std::vector<double> pinned;
  RatioSolution solution;
  std::vector<SweepPoint> points;  // lattice order, last pin varying fastest
};

/// Solves the ratio problem with mu(pin_k) = c_k for every lattice point and
/// keeps the best V. Throws InfeasibleError when every point is infeasible.
SweepResult pinned_sweep(const MeasureLP& lp, std::span<const Pin> pins, const SweepObjective& objective,
                         const SweepOptions& options = {});

/// [min, max] of mu(g) over the measure polytope (with its constraint rows).
std::pair<double, double> feasible_range(const MeasureLP& lp, const Expr& g, const lp::Options& options = {});

}  // namespace occm
