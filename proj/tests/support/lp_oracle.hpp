#pragma once

// Exhaustive basis enumeration for small standard-form LPs; the reference
// the simplex is checked against.

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "occm/lp.hpp"

namespace occm::testing {

// Gaussian elimination with partial pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t m = b.size();
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < m; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
    }
    if (std::abs(a[p][k]) < 1e-9) return std::nullopt;
    std::swap(a[p], a[k]);
    std::swap(b[p], b[k]);
    for (std::size_t i = k + 1; i < m; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < m; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(m);
  for (std::size_t i = m; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < m; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

// Exhaustive enumeration of all bases; nullopt if no feasible basis exists.
inline std::optional<double> brute_force_optimum(const lp::StandardLP& lp) {
  const std::size_t m = lp.rows();
  const std::size_t n = lp.cols();
  std::optional<double> best;
  std::vector<std::size_t> pick(m);
  for (std::size_t i = 0; i < m; ++i) pick[i] = i;
  for (;;) {
    std::vector<std::vector<double>> bm(m, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < m; ++k) bm[i][k] = lp.a(i, pick[k]);
    }
    if (auto x = solve_square(bm, lp.b())) {
      bool feasible = true;
      double obj = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        if ((*x)[k] < -1e-10) feasible = false;
        obj += lp.c()[pick[k]] * (*x)[k];
      }
      if (feasible && (!best || obj < *best)) best = obj;
    }
    // next combination
    std::size_t i = m;
    while (i > 0 && pick[i - 1] == n - m + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < m; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

}  // namespace occm::testing
