#include "occm/generalized.hpp"

#include <memory>
#include <sstream>

#include "occm/error.hpp"
#include "occm/quadrature.hpp"

namespace occm {

double antiderivative_P1(const Expr& P, Vec2 x, double tol) {
  return adaptive_simpson([&](double z) { return P.evaluate({z, x.y}, {}); }, 0.0, x.x, tol);
}

MeasureLP assemble_generalized(const GeneralizedCheegerProblem& problem) {
  if (problem.P.uses_control()) throw PreconditionError("P must depend on the state only");
  SpatialGrid grid = build_spatial_grid(problem.domain, problem.nx, problem.ny, GridLayout::vertex);
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const Vec2 x = grid.cells[i];
    const double v = problem.P.evaluate(x, {});
    if (v > 0.0) continue;
    std::ostringstream msg;
    msg << "P must be positive: P = " << v << " at cell " << i << " (" << x.x << ", " << x.y << ")";
    throw PreconditionError(msg.str());
  }

  // Tabulate P1 on the lattice; off-lattice points (curve samples) are
  // integrated on demand.
  auto table = std::make_shared<std::vector<double>>(grid.cells.size());
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    (*table)[i] = antiderivative_P1(problem.P, grid.cells[i], problem.quadrature_tol);
  }
  auto shared_grid = std::make_shared<SpatialGrid>(grid);
  const Expr P = problem.P;
  const double tol = problem.quadrature_tol;
  Integrand p("P1(x)*u2 with P = " + P.to_string(), [table, shared_grid, P, tol](Vec2 x, Vec2 u) {
    const std::int32_t id = shared_grid->nearest_cell(x);
    if (id >= 0 && shared_grid->cells[static_cast<std::size_t>(id)] == x) {
      return (*table)[static_cast<std::size_t>(id)] * u.y;
    }
    return antiderivative_P1(P, x, tol) * u.y;
  });

  AssembleOptions options;
  options.allow_nonpositive_q = problem.allow_nonpositive_q;
  return MeasureLP::assemble(DiscretizedSystem::make(std::move(grid), ControlGrid::unit_circle(problem.n_u)), p,
                             problem.Q, {}, problem.test_degree, options);
}

GeneralizedCheegerResult solve_generalized(const GeneralizedCheegerProblem& problem, RatioOptions options,
                                           const ExtractOptions& extract) {
  options.sense = Sense::maximize;
  MeasureLP lp = assemble_generalized(problem);
  RatioSolution solution = solve_ratio(lp, options);
  if (!(solution.measure.mu_q > problem.eta)) {
    std::ostringstream msg;
    msg << "mu(Q) = " << solution.measure.mu_q << " is not above eta = " << problem.eta;
    throw PreconditionError(msg.str());
  }
  PeriodicCurve curve = extract_curve(solution.measure, lp, extract);
  std::vector<std::string> warnings;
  if (curve.stationary) warnings.emplace_back("optimum is stationary (value 0), not a Jordan curve");
  return {std::move(lp), std::move(solution), std::move(curve), std::move(warnings)};
}

}  // namespace occm
