#pragma once

// Generalized Cheeger problem: maximize mu(P1(x) u2) / mu(Q), where P1 is
// the antiderivative of the area weight P in the first coordinate.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "occm/curve.hpp"
#include "occm/domain.hpp"
#include "occm/expr.hpp"
#include "occm/measure.hpp"
#include "occm/ratio.hpp"

namespace occm {

/// P1(x) = integral of P((z, x2)) for z from 0 to x1, by adaptive Simpson.
/// Evaluation errors of P propagate.
double antiderivative_P1(const Expr& P, Vec2 x, double tol = 1e-10);

struct GeneralizedCheegerProblem {
  Domain domain = Domain::disk(1.0);
  Expr P = Expr::parse("1");
  Expr Q = Expr::parse("1");
  std::size_t nx = 64;
  std::size_t ny = 64;
  std::size_t n_u = 32;
  int test_degree = 8;
  /// Accept Q that is not pointwise positive (for example Q depending on u);
  /// mu(Q) > eta is then checked on the result instead.
  bool allow_nonpositive_q = false;
  double eta = 1e-6;
  double quadrature_tol = 1e-10;
};

/// The LP with p = P1(x) u2 and q = Q on the problem's vertex lattice.
/// P1 is tabulated once per lattice point. Throws PreconditionError when P
/// is not positive at some lattice point, or Q unless overridden.
MeasureLP assemble_generalized(const GeneralizedCheegerProblem& problem);

struct GeneralizedCheegerResult {
  MeasureLP lp;
  RatioSolution solution;
  PeriodicCurve curve;
  std::vector<std::string> warnings;
};

/// Maximizes the ratio and extracts the optimal curve. A stationary optimum
/// (value 0) is returned with a warning. Throws PreconditionError when
/// mu(Q) <= eta on the optimum.
GeneralizedCheegerResult solve_generalized(const GeneralizedCheegerProblem& problem, RatioOptions options = {},
                                           const ExtractOptions& extract = {});

}  // namespace occm
