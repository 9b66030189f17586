#pragma once

#include <cmath>
#include <functional>

namespace occm {

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
/// Subintervals stop splitting at `max_depth`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                        int max_depth = 48);

}  // namespace occm
