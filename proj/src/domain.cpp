#include "occm/domain.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "occm/error.hpp"

namespace occm {

namespace {

std::string fmt_point(Vec2 p) { return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")"; }

std::vector<Vec2> rectangle_vertices(double w, double h, Vec2 c) {
  return {{c.x - 0.5 * w, c.y - 0.5 * h},
          {c.x + 0.5 * w, c.y - 0.5 * h},
          {c.x + 0.5 * w, c.y + 0.5 * h},
          {c.x - 0.5 * w, c.y + 0.5 * h}};
}

// Keeps the part of `poly` where dot(n, x - a) >= r.
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& poly, Vec2 a, Vec2 n, double r) {
  std::vector<Vec2> out;
  const std::size_t k = poly.size();
  out.reserve(k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % k];
    const double sp = dot(n, p - a) - r;
    const double sq = dot(n, q - a) - r;
    if (sp >= 0.0) out.push_back(p);
    if ((sp >= 0.0) != (sq >= 0.0)) {
      const double t = sp / (sp - sq);
      out.push_back(p + (q - p) * t);
    }
  }
  return out;
}

}  // namespace

double polygon_area(const std::vector<Vec2>& ccw) {
  double twice = 0.0;
  for (std::size_t i = 0; i < ccw.size(); ++i) twice += cross(ccw[i], ccw[(i + 1) % ccw.size()]);
  return 0.5 * twice;
}

double polygon_perimeter(const std::vector<Vec2>& poly) {
  double len = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) len += distance(poly[i], poly[(i + 1) % poly.size()]);
  return len;
}

Domain Domain::rectangle(double width, double height) {
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
    throw DomainError("rectangle dimensions must be positive and finite");
  }
  Domain d;
  d.kind_ = Kind::rectangle;
  d.width_ = width;
  d.height_ = height;
  return d;
}

Domain Domain::disk(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("disk radius must be positive and finite");
  Domain d;
  d.kind_ = Kind::disk;
  d.radius_ = radius;
  return d;
}

Domain Domain::convex_polygon(std::vector<Vec2> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) throw DomainError("convex polygon needs at least 3 vertices");
  bool strict = false;
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = vertices[(i + 1) % n] - vertices[i];
    const Vec2 e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
    if (norm(e0) == 0.0) throw DomainError("convex polygon has a repeated vertex");
    const double c = cross(e0, e1);
    if (c < 0.0) throw DomainError("polygon is not convex and counterclockwise");
    if (c > 0.0) strict = true;
    turning += std::atan2(c, dot(e0, e1));
  }
  if (!strict) throw DomainError("polygon is degenerate (all vertices collinear)");
  // A convex CCW polygon turns exactly once; more means it winds around twice.
  if (std::abs(turning - 2.0 * std::numbers::pi) > 1e-6) throw DomainError("polygon is not simple");
  Domain d;
  d.kind_ = Kind::convex_polygon;
  d.vertices_ = std::move(vertices);
  return d;
}

Domain Domain::implicit(Expr g, BoundingBox box) {
  if (!std::isfinite(box.xmin) || !std::isfinite(box.xmax) || !std::isfinite(box.ymin) ||
      !std::isfinite(box.ymax) || !(box.xmax > box.xmin) || !(box.ymax > box.ymin)) {
    throw DomainError("implicit domain needs a finite, nonempty bounding box");
  }
  Domain d;
  d.kind_ = Kind::implicit;
  d.expr_ = std::move(g);
  d.box_ = box;
  return d;
}

Domain Domain::translated(Vec2 shift) const {
  Domain d = *this;
  d.offset_ += shift;
  return d;
}

bool Domain::contains(Vec2 x, double slack) const {
  const Vec2 p = x - offset_;
  switch (kind_) {
    case Kind::rectangle:
      return std::abs(p.x) <= 0.5 * width_ + slack && std::abs(p.y) <= 0.5 * height_ + slack;
    case Kind::disk:
      return norm(p) <= radius_ + slack;
    case Kind::convex_polygon:
      for (std::size_t i = 0; i < vertices_.size(); ++i) {
        const Vec2 a = vertices_[i];
        const Vec2 e = vertices_[(i + 1) % vertices_.size()] - a;
        if (cross(e, p - a) / norm(e) < -slack) return false;
      }
      return true;
    case Kind::implicit: {
      if (!box_.contains(p, slack)) return false;
      try {
        return expr_->evaluate(p, {}) <= slack;
      } catch (const EvalError& e) {
        throw EvalError(e.offset(), std::string(e.what()) + " at x = " + fmt_point(x));
      }
    }
  }
  return false;
}

Vec2 Domain::project(Vec2 x) const {
  if (contains(x)) return x;
  Vec2 p = x - offset_;
  switch (kind_) {
    case Kind::rectangle:
      p = {std::clamp(p.x, -0.5 * width_, 0.5 * width_), std::clamp(p.y, -0.5 * height_, 0.5 * height_)};
      break;
    case Kind::disk:
      p = p * (radius_ / norm(p));
      break;
    case Kind::convex_polygon: {
      double best = std::numeric_limits<double>::infinity();
      Vec2 nearest = p;
      for (std::size_t i = 0; i < vertices_.size(); ++i) {
        const Vec2 a = vertices_[i];
        const Vec2 e = vertices_[(i + 1) % vertices_.size()] - a;
        const double t = std::clamp(dot(p - a, e) / dot(e, e), 0.0, 1.0);
        const Vec2 q = a + e * t;
        if (distance(p, q) < best) {
          best = distance(p, q);
          nearest = q;
        }
      }
      p = nearest;
      break;
    }
    case Kind::implicit: {
      p = {std::clamp(p.x, box_.xmin, box_.xmax), std::clamp(p.y, box_.ymin, box_.ymax)};
      const double h = 1e-7 * (1.0 + std::max(box_.width(), box_.height()));
      for (int it = 0; it < 50; ++it) {
        const double g = expr_->evaluate(p, {});
        if (g <= 0.0) break;
        const Vec2 grad{(expr_->evaluate(p + Vec2{h, 0.0}, {}) - expr_->evaluate(p - Vec2{h, 0.0}, {})) / (2.0 * h),
                        (expr_->evaluate(p + Vec2{0.0, h}, {}) - expr_->evaluate(p - Vec2{0.0, h}, {})) / (2.0 * h)};
        const double g2 = dot(grad, grad);
        if (g2 == 0.0) break;
        // Aim slightly past the zero level so the iterate lands inside.
        p -= grad * ((g + 1e-12) / g2 * 1.0000001);
      }
      break;
    }
  }
  return p + offset_;
}

BoundingBox Domain::bounding_box() const {
  BoundingBox b;
  switch (kind_) {
    case Kind::rectangle:
      b = {-0.5 * width_, 0.5 * width_, -0.5 * height_, 0.5 * height_};
      break;
    case Kind::disk:
      b = {-radius_, radius_, -radius_, radius_};
      break;
    case Kind::convex_polygon:
      b = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
      for (const Vec2 v : vertices_) {
        b.xmin = std::min(b.xmin, v.x);
        b.xmax = std::max(b.xmax, v.x);
        b.ymin = std::min(b.ymin, v.y);
        b.ymax = std::max(b.ymax, v.y);
      }
      break;
    case Kind::implicit:
      b = box_;
      break;
  }
  b.xmin += offset_.x;
  b.xmax += offset_.x;
  b.ymin += offset_.y;
  b.ymax += offset_.y;
  return b;
}

std::vector<Vec2> Domain::boundary_polygon(std::size_t n_disk_samples) const {
  switch (kind_) {
    case Kind::rectangle:
      return rectangle_vertices(width_, height_, offset_);
    case Kind::disk: {
      std::vector<Vec2> pts(n_disk_samples);
      for (std::size_t i = 0; i < n_disk_samples; ++i) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_disk_samples);
        pts[i] = offset_ + Vec2{radius_ * std::cos(t), radius_ * std::sin(t)};
      }
      return pts;
    }
    case Kind::convex_polygon: {
      std::vector<Vec2> pts = vertices_;
      for (Vec2& p : pts) p += offset_;
      return pts;
    }
    case Kind::implicit:
      break;
  }
  throw DomainError("implicit domains have no exact boundary polygon");
}

double Domain::area() const {
  switch (kind_) {
    case Kind::rectangle:
      return width_ * height_;
    case Kind::disk:
      return std::numbers::pi * radius_ * radius_;
    case Kind::convex_polygon:
      return polygon_area(vertices_);
    case Kind::implicit:
      break;
  }
  throw DomainError("exact area is not available for implicit domains");
}

double Domain::perimeter() const {
  switch (kind_) {
    case Kind::rectangle:
      return 2.0 * (width_ + height_);
    case Kind::disk:
      return 2.0 * std::numbers::pi * radius_;
    case Kind::convex_polygon:
      return polygon_perimeter(vertices_);
    case Kind::implicit:
      break;
  }
  throw DomainError("exact perimeter is not available for implicit domains");
}

double Domain::inradius() const {
  switch (kind_) {
    case Kind::rectangle:
      return 0.5 * std::min(width_, height_);
    case Kind::disk:
      return radius_;
    case Kind::convex_polygon: {
      double lo = 0.0;
      double hi = 0.5 * diameter();
      for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (inner_parallel_area(*this, mid) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return lo;
    }
    case Kind::implicit:
      break;
  }
  throw DomainError("inradius is not available for implicit domains");
}

double Domain::diameter() const {
  switch (kind_) {
    case Kind::rectangle:
      return std::hypot(width_, height_);
    case Kind::disk:
      return 2.0 * radius_;
    case Kind::convex_polygon: {
      double best = 0.0;
      for (const Vec2 a : vertices_) {
        for (const Vec2 b : vertices_) best = std::max(best, distance(a, b));
      }
      return best;
    }
    case Kind::implicit:
      break;
  }
  throw DomainError("diameter is not available for implicit domains");
}

std::vector<std::pair<Vec2, Vec2>> Domain::boundary_segments(std::size_t resolution) const {
  std::vector<std::pair<Vec2, Vec2>> segs;
  if (kind_ != Kind::implicit) {
    const auto poly = boundary_polygon(resolution);
    for (std::size_t i = 0; i < poly.size(); ++i) segs.emplace_back(poly[i], poly[(i + 1) % poly.size()]);
    return segs;
  }
  // Marching squares on a lattice padded by one cell of "outside" values so
  // that contours touching the box are closed.
  const BoundingBox b = bounding_box();
  const std::size_t n = std::max<std::size_t>(resolution, 4);
  const double hx = b.width() / static_cast<double>(n);
  const double hy = b.height() / static_cast<double>(n);
  const std::size_t m = n + 3;
  auto at = [&](std::size_t i, std::size_t j) {
    return Vec2{b.xmin + (static_cast<double>(i) - 1.0) * hx, b.ymin + (static_cast<double>(j) - 1.0) * hy};
  };
  std::vector<double> val(m * m, 1.0);
  for (std::size_t j = 1; j + 1 < m; ++j) {
    for (std::size_t i = 1; i + 1 < m; ++i) {
      const Vec2 p = at(i, j) - offset_;
      if (!box_.contains(p, 1e-12 * (b.width() + b.height()))) continue;
      try {
        val[j * m + i] = expr_->evaluate(p, {});
      } catch (const EvalError&) {
        val[j * m + i] = 1.0;
      }
    }
  }
  auto cut = [&](Vec2 p, Vec2 q, double vp, double vq) { return p + (q - p) * (vp / (vp - vq)); };
  for (std::size_t j = 0; j + 1 < m; ++j) {
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const Vec2 c[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      const double v[4] = {val[j * m + i], val[j * m + i + 1], val[(j + 1) * m + i + 1], val[(j + 1) * m + i]};
      std::vector<Vec2> hits;
      for (int e = 0; e < 4; ++e) {
        const int f = (e + 1) % 4;
        if ((v[e] <= 0.0) != (v[f] <= 0.0)) hits.push_back(cut(c[e], c[f], v[e], v[f]));
      }
      if (hits.size() == 2) {
        segs.emplace_back(hits[0], hits[1]);
      } else if (hits.size() == 4) {
        segs.emplace_back(hits[0], hits[1]);
        segs.emplace_back(hits[2], hits[3]);
      }
    }
  }
  return segs;
}

std::vector<Vec2> inner_parallel_polygon(const Domain& d, double r) {
  if (r < 0.0 || !std::isfinite(r)) throw PreconditionError("offset length must be finite and >= 0");
  if (d.kind() != Domain::Kind::rectangle && d.kind() != Domain::Kind::convex_polygon) {
    throw DomainError("inner parallel polygon requires a rectangle or convex polygon");
  }
  const std::vector<Vec2> poly = d.boundary_polygon();
  std::vector<Vec2> body = poly;
  for (std::size_t i = 0; i < poly.size() && !body.empty(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 e = poly[(i + 1) % poly.size()] - a;
    const Vec2 inward = Vec2{-e.y, e.x} * (1.0 / norm(e));
    body = clip_half_plane(body, a, inward, r);
  }
  if (body.size() < 3 || polygon_area(body) <= 0.0) return {};
  return body;
}

double inner_parallel_area(const Domain& d, double r) {
  if (r < 0.0 || !std::isfinite(r)) throw PreconditionError("offset length must be finite and >= 0");
  switch (d.kind()) {
    case Domain::Kind::rectangle:
      return std::max(0.0, d.width() - 2.0 * r) * std::max(0.0, d.height() - 2.0 * r);
    case Domain::Kind::disk: {
      const double s = std::max(0.0, d.radius() - r);
      return std::numbers::pi * s * s;
    }
    case Domain::Kind::convex_polygon: {
      const auto body = inner_parallel_polygon(d, r);
      return body.empty() ? 0.0 : polygon_area(body);
    }
    case Domain::Kind::implicit:
      break;
  }
  throw DomainError("inner parallel area is only defined for convex domains");
}

ControlGrid ControlGrid::unit_circle(std::size_t n_u, bool include_zero) {
  if (n_u < 1) throw PreconditionError("control grid needs at least one direction");
  ControlGrid g;
  g.directions.reserve(n_u + (include_zero ? 1 : 0));
  for (std::size_t j = 0; j < n_u; ++j) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_u);
    double c = std::cos(t);
    double s = std::sin(t);
    // Snap the cos/sin of multiples of pi/2 so axis directions are exact.
    if (std::abs(c) < 1e-15) c = 0.0;
    if (std::abs(s) < 1e-15) s = 0.0;
    g.directions.push_back({c, s});
  }
  if (include_zero) g.directions.push_back({0.0, 0.0});
  return g;
}

Vec2 SpatialGrid::lattice_point(std::size_t ix, std::size_t iy) const {
  const double fx = layout == GridLayout::vertex ? static_cast<double>(ix) : static_cast<double>(ix) + 0.5;
  const double fy = layout == GridLayout::vertex ? static_cast<double>(iy) : static_cast<double>(iy) + 0.5;
  // Vertex layouts hit the far box edge exactly.
  const double x = layout == GridLayout::vertex && ix == nx ? box.xmax : box.xmin + fx * hx;
  const double y = layout == GridLayout::vertex && iy == ny ? box.ymax : box.ymin + fy * hy;
  return {x, y};
}

std::int32_t SpatialGrid::nearest_cell(Vec2 p) const {
  const double off = layout == GridLayout::vertex ? 0.0 : 0.5;
  const auto px = static_cast<std::int64_t>(points_x());
  const auto py = static_cast<std::int64_t>(points_y());
  const auto cx = std::clamp<std::int64_t>(std::llround((p.x - box.xmin) / hx - off), 0, px - 1);
  const auto cy = std::clamp<std::int64_t>(std::llround((p.y - box.ymin) / hy - off), 0, py - 1);
  std::int32_t best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  const std::int64_t max_ring = std::max(px, py);
  std::int64_t found_ring = -1;
  for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
    if (found_ring >= 0 && ring > found_ring + 1) break;
    for (std::int64_t iy = cy - ring; iy <= cy + ring; ++iy) {
      if (iy < 0 || iy >= py) continue;
      for (std::int64_t ix = cx - ring; ix <= cx + ring; ++ix) {
        if (ix < 0 || ix >= px) continue;
        if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != ring) continue;
        const std::int32_t id = cell_at(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy));
        if (id < 0) continue;
        const double dd = distance(cells[static_cast<std::size_t>(id)], p);
        if (dd < best_d || (dd == best_d && id < best)) {
          best_d = dd;
          best = id;
        }
      }
    }
    if (best >= 0 && found_ring < 0) found_ring = ring;
  }
  return best;
}

SpatialGrid build_spatial_grid(const Domain& d, std::size_t nx, std::size_t ny, GridLayout layout) {
  if (nx < 2 || ny < 2) throw PreconditionError("grid needs nx, ny >= 2");
  SpatialGrid g;
  g.layout = layout;
  g.nx = nx;
  g.ny = ny;
  g.box = d.bounding_box();
  g.domain = d;
  g.hx = g.box.width() / static_cast<double>(nx);
  g.hy = g.box.height() / static_cast<double>(ny);
  const std::size_t px = g.points_x();
  const std::size_t py = g.points_y();
  g.lookup.assign(px * py, -1);
  // Absorbs rounding on boundary lattice points only.
  const double slack = 1e-12 * (g.box.width() + g.box.height());
  for (std::size_t iy = 0; iy < py; ++iy) {
    for (std::size_t ix = 0; ix < px; ++ix) {
      const Vec2 p = g.lattice_point(ix, iy);
      if (!d.contains(p, slack)) continue;
      g.lookup[iy * px + ix] = static_cast<std::int32_t>(g.cells.size());
      g.cells.push_back(p);
      g.lattice.emplace_back(static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy));
    }
  }
  if (g.cells.empty()) throw DomainError("spatial grid has no points inside the domain");
  return g;
}

}  // namespace occm
