#include "occm/oracles.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "occm/error.hpp"

namespace occm {

CheegerOracle cheeger_constant(const Domain& d) {
  if (!d.is_convex()) throw DomainError("Cheeger oracle needs a convex domain");
  CheegerOracle o;
  if (d.kind() == Domain::Kind::disk) {
    o.r_star = 0.5 * d.radius();
  } else {
    const auto phi = [&](double r) { return inner_parallel_area(d, r) - std::numbers::pi * r * r; };
    double lo = 0.0;
    double hi = d.inradius();
    if (!(phi(lo) > 0.0 && phi(hi) < 0.0)) throw DomainError("Cheeger equation has no sign change on (0, inradius]");
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      (phi(mid) > 0.0 ? lo : hi) = mid;
    }
    o.r_star = 0.5 * (lo + hi);
  }
  o.v_star = o.r_star;
  o.h_star = 1.0 / o.r_star;
  return o;
}

std::vector<Vec2> cheeger_set_boundary(const Domain& d, std::size_t n_samples) {
  if (n_samples < 3) throw PreconditionError("need at least 3 boundary samples");
  const double r = cheeger_constant(d).r_star;
  std::vector<Vec2> out;
  out.reserve(n_samples);
  if (d.kind() == Domain::Kind::disk) {
    for (std::size_t i = 0; i < n_samples; ++i) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(i % (n_samples - 1)) / static_cast<double>(n_samples - 1);
      out.push_back(d.offset() + Vec2{d.radius() * std::cos(t), d.radius() * std::sin(t)});
    }
    return out;
  }

  const std::vector<Vec2> inner = inner_parallel_polygon(d, r);
  const std::size_t m = inner.size();
  if (m < 3) throw DomainError("inner parallel body at the Cheeger radius is degenerate");
  // Piece k: edge k shifted outward, then the arc around vertex k + 1.
  std::vector<Vec2> normal(m);
  std::vector<double> edge_len(m);
  std::vector<double> arc_angle(m);
  for (std::size_t k = 0; k < m; ++k) {
    const Vec2 e = inner[(k + 1) % m] - inner[k];
    edge_len[k] = norm(e);
    normal[k] = Vec2{e.y, -e.x} * (1.0 / edge_len[k]);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const Vec2 a = normal[k];
    const Vec2 b = normal[(k + 1) % m];
    arc_angle[k] = std::atan2(cross(a, b), dot(a, b));
    total += edge_len[k] + r * arc_angle[k];
  }
  auto point_at = [&](double s) {
    for (std::size_t k = 0; k < m; ++k) {
      const Vec2 a = inner[k];
      const Vec2 b = inner[(k + 1) % m];
      if (s <= edge_len[k]) return a + (b - a) * (s / edge_len[k]) + normal[k] * r;
      s -= edge_len[k];
      if (s <= r * arc_angle[k] || k + 1 == m) {
        const double t = std::atan2(normal[k].y, normal[k].x) + std::min(s / r, arc_angle[k]);
        return b + Vec2{r * std::cos(t), r * std::sin(t)};
      }
      s -= r * arc_angle[k];
    }
    return inner[0] + normal[0] * r;
  };
  for (std::size_t i = 0; i + 1 < n_samples; ++i) out.push_back(point_at(total * static_cast<double>(i) / static_cast<double>(n_samples - 1)));
  out.push_back(out.front());
  return out;
}

DoubleWellOracle double_well_oracle(double mass) {
  if (!(std::abs(mass) < 1.0)) throw PreconditionError("double-well mass must lie in (-1, 1)");
  DoubleWellOracle o;
  o.v_star = 0.0;
  o.lambda = 0.5 * (1.0 - mass);
  return o;
}

DiscretizedSystem scalar_strip(double half_width, std::size_t nx) {
  if (!(half_width > 0.0) || nx < 2) throw PreconditionError("scalar strip needs a positive width and nx >= 2");
  const double h = 2.0 * half_width / static_cast<double>(nx);
  const Domain strip = Domain::rectangle(2.0 * half_width, 2.0 * h);
  return DiscretizedSystem::make(build_spatial_grid(strip, nx, 2, GridLayout::vertex), ControlGrid::unit_circle(2, true));
}

MeasureLP example_cumulative_lp(std::size_t nx, int test_degree) {
  return MeasureLP::assemble(scalar_strip(1.0, nx), Expr::parse("1 - x1 - x1^2"), Expr::parse("1"),
                             {{Expr::parse("x1"), lp::RowSense::le}}, test_degree);
}

MeasureLP example_nonconcave_lp(std::size_t nx, int test_degree) {
  return MeasureLP::assemble(scalar_strip(1.0, nx), Expr::parse("abs(x1)"), Expr::parse("1"), {}, test_degree);
}

MeasureLP double_well_lp(double mass, double half_width, std::size_t nx, int test_degree,
                         const std::string& constraint) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, mass);
  const std::string g = "(" + constraint + ") - (" + std::string(buf, res.ptr) + ")";
  return MeasureLP::assemble(scalar_strip(half_width, nx), Expr::parse("(1 - x1^2)^2 + u1^2/2"), Expr::parse("1"),
                             {{Expr::parse(g), lp::RowSense::eq}}, test_degree);
}

}  // namespace occm
