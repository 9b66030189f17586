#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "occm/expr.hpp"
#include "occm/vec2.hpp"

namespace occm {

struct BoundingBox {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  Vec2 half_extent() const { return {0.5 * width(), 0.5 * height()}; }
  bool contains(Vec2 p, double slack = 0.0) const {
    return p.x >= xmin - slack && p.x <= xmax + slack && p.y >= ymin - slack && p.y <= ymax + slack;
  }
};

/// Compact planar constraint set K. Rectangles and disks are centered at the
/// origin unless translated.
class Domain {
 public:
  enum class Kind : std::uint8_t { rectangle, disk, convex_polygon, implicit };

  static Domain rectangle(double width, double height);
  static Domain disk(double radius);
  /// Vertices counterclockwise; throws DomainError unless simple, convex and CCW.
  static Domain convex_polygon(std::vector<Vec2> vertices);
  /// Region {x in box : g(x) <= 0}.
  static Domain implicit(Expr g, BoundingBox box);

  Domain translated(Vec2 shift) const;

  Kind kind() const { return kind_; }
  bool is_convex() const { return kind_ != Kind::implicit; }
  Vec2 offset() const { return offset_; }

  double width() const { return width_; }
  double height() const { return height_; }
  double radius() const { return radius_; }
  /// Untranslated polygon vertices (empty unless convex_polygon).
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::optional<Expr>& expression() const { return expr_; }

  /// Closed-region membership. `slack` widens the region by that amount in
  /// the kind's natural metric; implicit regions compare g(x) <= slack.
  bool contains(Vec2 x, double slack = 0.0) const;

  BoundingBox bounding_box() const;

  /// Nearest point of the closed region; x itself when inside. Implicit
  /// regions are approached by Newton steps along the numerical gradient of
  /// g and may return a point slightly outside when those stall.
  Vec2 project(Vec2 x) const;

  // The following throw DomainError for implicit domains.
  double area() const;
  double perimeter() const;
  double inradius() const;
  double diameter() const;
  /// Polygon (CCW, translated) of the boundary; disks are sampled at n points.
  std::vector<Vec2> boundary_polygon(std::size_t n_disk_samples = 256) const;

  /// Boundary of any kind as segments; implicit regions are contoured by
  /// marching squares at the given resolution.
  std::vector<std::pair<Vec2, Vec2>> boundary_segments(std::size_t resolution = 256) const;

 private:
  Kind kind_ = Kind::rectangle;
  double width_ = 0.0;
  double height_ = 0.0;
  double radius_ = 0.0;
  std::vector<Vec2> vertices_;
  std::optional<Expr> expr_;
  BoundingBox box_;  // implicit only, untranslated
  Vec2 offset_;
};

/// Area of the inner parallel body {x : dist(x, boundary) >= r}; 0 if empty.
double inner_parallel_area(const Domain& d, double r);

/// Inner parallel body of a rectangle or convex polygon by half-plane
/// clipping, CCW; empty when degenerate. Throws DomainError for disks and
/// implicit domains.
std::vector<Vec2> inner_parallel_polygon(const Domain& d, double r);

double polygon_area(const std::vector<Vec2>& ccw);
double polygon_perimeter(const std::vector<Vec2>& poly);

/// Control directions u_j = (cos 2 pi j / n, sin 2 pi j / n), optionally
/// followed by the zero control (a resting state, used by scalar problems).
struct ControlGrid {
  std::vector<Vec2> directions;

  static ControlGrid unit_circle(std::size_t n_u, bool include_zero = false);
  std::size_t size() const { return directions.size(); }
};

enum class GridLayout : std::uint8_t {
  cell_centered,  // n cells per axis, points at cell centers
  vertex,         // n cells per axis, points at the n+1 cell corners (hits the box edges)
};

struct SpatialGrid {
  GridLayout layout = GridLayout::cell_centered;
  std::size_t nx = 0;
  std::size_t ny = 0;
  BoundingBox box;
  double hx = 0.0;
  double hy = 0.0;
  std::vector<Vec2> cells;
  /// Lattice index of each retained point (ix, iy).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> lattice;
  /// Row-major lattice -> cell id, -1 when the lattice point lies outside K.
  std::vector<std::int32_t> lookup;
  /// Domain the grid was built from (absent for hand-made grids).
  std::optional<Domain> domain;

  std::size_t points_x() const { return layout == GridLayout::vertex ? nx + 1 : nx; }
  std::size_t points_y() const { return layout == GridLayout::vertex ? ny + 1 : ny; }
  Vec2 lattice_point(std::size_t ix, std::size_t iy) const;
  std::int32_t cell_at(std::size_t ix, std::size_t iy) const { return lookup[iy * points_x() + ix]; }
  /// Retained cell whose lattice point is closest to p (brute force over the
  /// lattice neighborhood, then over all cells).
  std::int32_t nearest_cell(Vec2 p) const;
  double cell_size() const { return std::max(hx, hy); }
};

/// Uniform grid over the bounding box keeping points inside K (row-major).
/// Throws PreconditionError when nx or ny < 2, DomainError when no point is
/// retained, EvalError (with coordinates) when an implicit domain fails.
SpatialGrid build_spatial_grid(const Domain& d, std::size_t nx, std::size_t ny,
                               GridLayout layout = GridLayout::cell_centered);

}  // namespace occm
