#pragma once

// Ground truth that does not go through the LP: Cheeger sets of convex
// domains, the constrained double well, and the one-dimensional examples
// embedded as thin strips.

#include <cstddef>
#include <string>
#include <vector>

#include "occm/domain.hpp"
#include "occm/measure.hpp"

namespace occm {

struct CheegerOracle {
  double r_star = 0.0;  // root of |inner parallel body at r| = pi r^2
  double v_star = 0.0;  // maximal area / perimeter, equal to r_star
  double h_star = 0.0;  // Cheeger constant 1 / r_star
};

/// Throws DomainError for implicit domains or when the defining function
/// does not change sign on (0, inradius].
CheegerOracle cheeger_constant(const Domain& d);

/// Boundary of (inner parallel body at r_star) + disk(r_star), sampled by
/// arc length, counterclockwise; the last point repeats the first.
std::vector<Vec2> cheeger_set_boundary(const Domain& d, std::size_t n_samples = 512);

struct DoubleWellOracle {
  double v_star = 0.0;
  double lambda = 0.0;  // weight of the atom at -1
  Vec2 left{-1.0, 0.0};   // (state, derivative)
  Vec2 right{1.0, 0.0};
};

/// W(u) = (1 - u^2)^2 with mean M; throws PreconditionError unless |M| < 1.
DoubleWellOracle double_well_oracle(double mass);

/// One-dimensional system x' = u, |u| <= 1 on [-half_width, half_width],
/// embedded as the strip [-a, a] x [-h, h] with h one lattice step. The
/// spatial grid is a vertex lattice (nx + 1 points per row, three rows) and
/// the controls are +e1, -e1 and 0.
DiscretizedSystem scalar_strip(double half_width, std::size_t nx);

/// min mu(1 - x - x^2) subject to mu(x) <= 0 on [-1, 1].
MeasureLP example_cumulative_lp(std::size_t nx = 20, int test_degree = 8);

/// Scalar system with p = |x|, q = 1; pin mu(x1) to sweep.
MeasureLP example_nonconcave_lp(std::size_t nx = 20, int test_degree = 8);

/// min mu(W(x) + u^2 / 2) subject to mu(g) = M, g = x1 by default.
MeasureLP double_well_lp(double mass, double half_width = 1.5, std::size_t nx = 24, int test_degree = 8,
                         const std::string& constraint = "x1");

}  // namespace occm
