#include "occm/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <utility>

#include "occm/error.hpp"
#include "occm/quadrature.hpp"

namespace occm {

namespace {

// Barycentric control and drift per support cell, interpolated bilinearly
// over the occupied corners of the lattice square containing x, and by
// inverse distance weighting where no corner is occupied.
class RelaxedField {
 public:
  RelaxedField(const OptimalMeasure& m, const DiscretizedSystem& sys) : grid_(sys.grid) {
    const std::size_t n_cells = grid_.cells.size();
    mass_.assign(n_cells, 0.0);
    ubar_.assign(n_cells, Vec2{});
    drift_.assign(n_cells, Vec2{});
    for (const std::size_t col : m.support) {
      const std::size_t i = sys.cell_of(col);
      const double w = m.weights[col];
      mass_[i] += w;
      ubar_[i] += sys.control(col) * w;
      drift_[i] += sys.dynamics[col] * w;
    }
    for (std::size_t i = 0; i < n_cells; ++i) {
      if (mass_[i] <= 0.0) continue;
      ubar_[i] = ubar_[i] * (1.0 / mass_[i]);
      drift_[i] = drift_[i] * (1.0 / mass_[i]);
      occupied_.push_back(i);
    }
    origin_ = grid_.lattice_point(0, 0);
  }

  bool empty() const { return occupied_.empty(); }
  double mass(std::size_t cell) const { return mass_[cell]; }
  const std::vector<std::size_t>& occupied() const { return occupied_; }

  // Returns (drift, control) at x.
  std::pair<Vec2, Vec2> at(Vec2 x) const {
    const double fx = (x.x - origin_.x) / grid_.hx;
    const double fy = (x.y - origin_.y) / grid_.hy;
    const auto px = static_cast<std::int64_t>(grid_.points_x());
    const auto py = static_cast<std::int64_t>(grid_.points_y());
    const auto ix = static_cast<std::int64_t>(std::floor(fx));
    const auto iy = static_cast<std::int64_t>(std::floor(fy));
    const double tx = fx - static_cast<double>(ix);
    const double ty = fy - static_cast<double>(iy);
    Vec2 drift;
    Vec2 control;
    double total = 0.0;
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dx = 0; dx <= 1; ++dx) {
        const std::int64_t cx = ix + dx;
        const std::int64_t cy = iy + dy;
        if (cx < 0 || cy < 0 || cx >= px || cy >= py) continue;
        const std::int32_t id = grid_.cell_at(static_cast<std::size_t>(cx), static_cast<std::size_t>(cy));
        if (id < 0 || mass_[static_cast<std::size_t>(id)] <= 0.0) continue;
        const double w = (dx == 1 ? tx : 1.0 - tx) * (dy == 1 ? ty : 1.0 - ty);
        if (w <= 0.0) continue;
        drift += drift_[static_cast<std::size_t>(id)] * w;
        control += ubar_[static_cast<std::size_t>(id)] * w;
        total += w;
      }
    }
    if (total > 1e-12) return {drift * (1.0 / total), control * (1.0 / total)};
    return shepard(x);
  }

 private:
  // Mass-weighted inverse distance (power 4) over all occupied cells. A
  // basic LP solution has at most as many atoms as rows, so the support is
  // usually a sparse chain and this is where the field comes from.
  std::pair<Vec2, Vec2> shepard(Vec2 x) const {
    Vec2 drift;
    Vec2 control;
    double total = 0.0;
    for (const std::size_t i : occupied_) {
      const double d2 = dot(grid_.cells[i] - x, grid_.cells[i] - x);
      if (d2 < 1e-24) return {drift_[i], ubar_[i]};
      const double w = mass_[i] / (d2 * d2);
      drift += drift_[i] * w;
      control += ubar_[i] * w;
      total += w;
    }
    return {drift * (1.0 / total), control * (1.0 / total)};
  }

  const SpatialGrid& grid_;
  Vec2 origin_;
  std::vector<double> mass_;
  std::vector<Vec2> ubar_;
  std::vector<Vec2> drift_;
  std::vector<std::size_t> occupied_;
};

bool inside(const SpatialGrid& grid, Vec2 x, double slack) {
  return grid.domain ? grid.domain->contains(x, slack) : grid.box.contains(x, slack);
}

Vec2 project(const SpatialGrid& grid, Vec2 x) {
  if (grid.domain) return grid.domain->project(x);
  return {std::clamp(x.x, grid.box.xmin, grid.box.xmax), std::clamp(x.y, grid.box.ymin, grid.box.ymax)};
}

std::string point_text(Vec2 x) {
  std::ostringstream os;
  os.precision(6);
  os << "(" << x.x << ", " << x.y << ")";
  return os.str();
}

double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  return ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0));
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + ab * t);
}

double directed_hausdorff(std::span<const Vec2> from, std::span<const Vec2> to) {
  double worst = 0.0;
  for (const Vec2 p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < to.size(); ++i) {
      best = std::min(best, point_segment_distance(p, to[i], to[(i + 1) % to.size()]));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double PeriodicCurve::cycle_average(const Integrand& g) const {
  if (points.empty()) throw PreconditionError("curve has no samples");
  double s = 0.0;
  for (std::size_t l = 0; l < points.size(); ++l) s += g(points[l], controls[l]);
  return s / static_cast<double>(points.size());
}

Vec2 PeriodicCurve::position(double t) const {
  if (points.empty()) throw PreconditionError("curve has no samples");
  if (stationary || points.size() == 1) return points.front();
  double s = std::fmod(t, period);
  if (s < 0.0) s += period;
  const double f = s / dt;
  const auto l = std::min(static_cast<std::size_t>(f), points.size() - 1);
  const double frac = f - static_cast<double>(l);
  const Vec2 a = points[l];
  const Vec2 b = points[(l + 1) % points.size()];
  return a + (b - a) * frac;
}

PeriodicCurve extract_curve(const OptimalMeasure& m, const MeasureLP& lp, const ExtractOptions& options) {
  const DiscretizedSystem& sys = lp.system();
  const SpatialGrid& grid = sys.grid;
  const RelaxedField field(m, sys);
  if (field.empty()) throw PreconditionError("measure support is empty");

  std::size_t seed = field.occupied().front();
  if (options.seed_cell) {
    seed = *options.seed_cell;
    if (seed >= grid.cells.size() || field.mass(seed) <= 0.0) {
      throw PreconditionError("seed cell " + std::to_string(seed) + " carries no support");
    }
  } else {
    for (const std::size_t i : field.occupied()) {
      if (field.mass(i) > field.mass(seed)) seed = i;
    }
  }

  const double dt = options.dt > 0.0 ? options.dt : 0.25 * std::min(grid.hx, grid.hy);
  const double close_tol = options.close_tol > 0.0 ? options.close_tol : std::max(grid.hx, grid.hy);
  const double slack = options.exit_slack > 0.0 ? options.exit_slack : 0.5 * std::max(grid.hx, grid.hy);

  auto finish = [&](PeriodicCurve c) {
    c.mean_p = c.cycle_average(lp.p());
    c.mean_q = c.cycle_average(lp.q());
    for (const AveragedConstraint& k : lp.constraints()) c.mean_constraints.push_back(c.cycle_average(k.expr));
    return c;
  };

  const Vec2 x0 = grid.cells[seed];
  const auto [f0, u0] = field.at(x0);
  if (norm(f0) < options.stationary_speed) {
    PeriodicCurve c;
    c.stationary = true;
    c.points = {x0};
    c.controls = {u0};
    c.dt = 0.0;
    c.period = 1.0;
    return finish(std::move(c));
  }

  // Closure is detected on the section through the seed normal to the
  // field there: once two successive crossings near the seed agree within
  // close_tol, one period is traced again from the earlier crossing. A
  // cycle through the seed closes at the first crossing; a trajectory that
  // spirals onto a nearby limit cycle closes once it has settled.
  const Vec2 normal = f0 * (1.0 / norm(f0));
  const double reach = 10.0 * close_tol;
  std::size_t budget = options.max_steps;
  auto advance = [&](Vec2 x) {
    if (budget == 0) {
      throw ExtractionError("trajectory does not close within " + std::to_string(options.max_steps) + " steps");
    }
    --budget;
    const Vec2 k1 = field.at(x).first;
    const Vec2 k2 = field.at(x + k1 * (0.5 * dt)).first;
    const Vec2 k3 = field.at(x + k2 * (0.5 * dt)).first;
    const Vec2 k4 = field.at(x + k3 * dt).first;
    const Vec2 free = x + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0);
    // Steps that graze the boundary are projected back onto K; a deep exit,
    // or a field pushing straight into the boundary, is a failure.
    const Vec2 next = project(grid, free);
    if (distance(next, free) > slack || !inside(grid, next, 1e-9) ||
        distance(next, x) < 1e-3 * distance(free, x)) {
      throw ExtractionError("trajectory leaves the domain at " + point_text(free) + " after " +
                            std::to_string(options.max_steps - budget) + " steps");
    }
    return next;
  };
  // Section crossing on the step a -> b, if any.
  auto crossing = [&](Vec2 a, Vec2 b) -> std::optional<Vec2> {
    const double sa = dot(a - x0, normal);
    const double sb = dot(b - x0, normal);
    if (!(sa < 0.0 && sb >= 0.0)) return std::nullopt;
    const Vec2 p = a + (b - a) * (-sa / (sb - sa));
    if (distance(p, x0) > reach) return std::nullopt;
    return p;
  };

  Vec2 start = x0;
  {
    Vec2 x = x0;
    std::size_t since = 0;
    for (;;) {
      const Vec2 next = advance(x);
      ++since;
      if (since >= 10) {
        if (const auto p = crossing(x, next)) {
          if (distance(*p, start) <= close_tol) break;
          start = *p;
          since = 0;
        }
      }
      x = next;
    }
  }

  PeriodicCurve c;
  c.dt = dt;
  c.points.push_back(start);
  Vec2 x = start;
  for (;;) {
    const Vec2 next = advance(x);
    if (c.points.size() >= 10 && crossing(x, next)) {
      // x(L dt) is whichever of the bracketing samples returns closer.
      const double d_prev = distance(x, start);
      const double d_next = distance(next, start);
      if (d_prev < d_next && c.points.size() > 10) {
        c.points.pop_back();
        c.closure_error = d_prev;
      } else {
        c.closure_error = d_next;
      }
      break;
    }
    x = next;
    c.points.push_back(x);
  }
  for (const Vec2 p : c.points) c.controls.push_back(field.at(p).second);
  c.period = static_cast<double>(c.points.size()) * dt;
  c.jordan = is_jordan(c.points);
  return finish(std::move(c));
}

std::vector<SupportCluster> support_clusters(const OptimalMeasure& m, const DiscretizedSystem& system) {
  const SpatialGrid& grid = system.grid;
  const std::vector<std::size_t> cells = m.support_cells(system);
  std::vector<double> mass(grid.cells.size(), 0.0);
  for (const std::size_t col : m.support) mass[system.cell_of(col)] += m.weights[col];
  std::vector<char> seen(grid.cells.size(), 0);
  std::vector<SupportCluster> out;
  const auto px = static_cast<std::int64_t>(grid.points_x());
  const auto py = static_cast<std::int64_t>(grid.points_y());
  for (const std::size_t start : cells) {
    if (seen[start]) continue;
    SupportCluster cl;
    cl.heaviest = start;
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      cl.cells.push_back(i);
      cl.mass += mass[i];
      if (mass[i] > mass[cl.heaviest]) cl.heaviest = i;
      const auto [lx, ly] = grid.lattice[i];
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const std::int64_t nx = lx + dx;
          const std::int64_t ny = ly + dy;
          if (nx < 0 || ny < 0 || nx >= px || ny >= py) continue;
          const std::int32_t id = grid.cell_at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny));
          if (id < 0) continue;
          const auto j = static_cast<std::size_t>(id);
          if (seen[j] || mass[j] <= 0.0) continue;
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    std::sort(cl.cells.begin(), cl.cells.end());
    out.push_back(std::move(cl));
  }
  return out;
}

SupportDecomposition decompose_support(const OptimalMeasure& m, const MeasureLP& lp, const ExtractOptions& options) {
  std::vector<SupportCluster> clusters = support_clusters(m, lp.system());
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const SupportCluster& a, const SupportCluster& b) { return a.mass > b.mass; });
  double total = 0.0;
  for (const SupportCluster& cl : clusters) total += cl.mass;
  const SpatialGrid& grid = lp.system().grid;
  const double reach = options.absorb_cells * grid.cell_size();
  SupportDecomposition out;
  for (const SupportCluster& cl : clusters) {
    const Vec2 seed = grid.cells[cl.heaviest];
    std::size_t owner = out.pieces.size();
    double best = reach;
    for (std::size_t k = 0; k < out.pieces.size(); ++k) {
      const double d = directed_hausdorff(std::span<const Vec2>(&seed, 1), out.pieces[k].points);
      if (d <= best) {
        best = d;
        owner = k;
      }
    }
    if (owner < out.pieces.size()) {
      out.lambda[owner] += cl.mass / total;
      continue;
    }
    ExtractOptions o = options;
    o.seed_cell = cl.heaviest;
    out.pieces.push_back(extract_curve(m, lp, o));
    out.lambda.push_back(cl.mass / total);
  }
  return out;
}

bool is_jordan(std::span<const Vec2> closed) {
  const std::size_t n = closed.size();
  if (n < 3) return true;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = closed[i];
    const Vec2 b = closed[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // the closing segment shares a vertex with the first
      if (segments_cross(a, b, closed[j], closed[(j + 1) % n])) return false;
    }
  }
  return true;
}

double hausdorff_distance(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) throw PreconditionError("hausdorff distance of an empty polyline");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kNoPath = std::numeric_limits<double>::infinity();

// Dijkstra over the 8-connected lattice of retained points.
struct LatticeGraph {
  const SpatialGrid& grid;

  std::vector<std::pair<std::size_t, double>> neighbours(std::size_t i) const {
    std::vector<std::pair<std::size_t, double>> out;
    const auto px = static_cast<std::int64_t>(grid.points_x());
    const auto py = static_cast<std::int64_t>(grid.points_y());
    const auto [lx, ly] = grid.lattice[i];
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const std::int64_t nx = lx + dx;
        const std::int64_t ny = ly + dy;
        if (nx < 0 || ny < 0 || nx >= px || ny >= py) continue;
        const std::int32_t id = grid.cell_at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny));
        if (id < 0) continue;
        const auto j = static_cast<std::size_t>(id);
        out.emplace_back(j, distance(grid.cells[i], grid.cells[j]));
      }
    }
    return out;
  }

  std::pair<std::vector<double>, std::vector<std::size_t>> shortest(std::size_t source) const {
    const std::size_t n = grid.cells.size();
    std::vector<double> dist(n, kNoPath);
    std::vector<std::size_t> prev(n, n);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [d, i] = heap.top();
      heap.pop();
      if (d > dist[i]) continue;
      for (const auto& [j, w] : neighbours(i)) {
        if (d + w < dist[j]) {
          dist[j] = d + w;
          prev[j] = i;
          heap.emplace(dist[j], j);
        }
      }
    }
    return {std::move(dist), std::move(prev)};
  }
};

bool segment_inside(const SpatialGrid& grid, Vec2 a, Vec2 b) {
  const double step = 0.25 * std::min(grid.hx, grid.hy);
  const auto n = static_cast<std::size_t>(std::ceil(distance(a, b) / step));
  const double slack = 1e-9 * (1.0 + grid.cell_size());
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n);
    if (!inside(grid, a + (b - a) * t, slack)) return false;
  }
  return true;
}

double path_length(const std::vector<Vec2>& path) {
  double len = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) len += distance(path[k - 1], path[k]);
  return len;
}

std::vector<Vec2> steering_path(const SpatialGrid& grid, Vec2 a, Vec2 b) {
  if (segment_inside(grid, a, b)) return {a, b};
  const LatticeGraph graph{grid};
  const std::int32_t ia = grid.nearest_cell(a);
  const std::int32_t ib = grid.nearest_cell(b);
  const auto [dist, prev] = graph.shortest(static_cast<std::size_t>(ia));
  const auto target = static_cast<std::size_t>(ib);
  if (dist[target] == kNoPath) {
    throw Error("steering", "no lattice path joins " + point_text(a) + " and " + point_text(b));
  }
  std::vector<Vec2> rev{b};
  for (std::size_t i = target; i < grid.cells.size(); i = prev[i]) rev.push_back(grid.cells[i]);
  rev.push_back(a);
  std::reverse(rev.begin(), rev.end());
  // Drop repeated points (a or b may coincide with their lattice points).
  std::vector<Vec2> path;
  for (const Vec2 p : rev) {
    if (path.empty() || distance(path.back(), p) > 1e-14) path.push_back(p);
  }
  if (path.size() == 1) path.push_back(path.front());
  return path;
}

double default_steering_bound(const SpatialGrid& grid) {
  if (grid.domain && grid.domain->is_convex()) return grid.domain->diameter();
  // Twice the largest lattice distance from a central point bounds every
  // pairwise lattice distance by the triangle inequality.
  const auto c = static_cast<std::size_t>(grid.nearest_cell(grid.box.center()));
  const LatticeGraph graph{grid};
  const auto dist = graph.shortest(c).first;
  double worst = 0.0;
  for (const double d : dist) {
    if (d != kNoPath) worst = std::max(worst, d);
  }
  return 2.0 * worst + 2.0 * grid.cell_size();
}

double period_of(const PeriodicCurve& c) { return c.stationary ? 1.0 : c.period; }

// Integral of g along piece c over [phase, phase + duration].
struct PieceIntegral {
  const PeriodicCurve& c;
  std::vector<double> samples;
  std::vector<double> prefix;  // prefix[l] = dt * sum_{i<l} samples[i]
  double mean = 0.0;

  PieceIntegral(const PeriodicCurve& curve, const Integrand& g) : c(curve) {
    for (std::size_t l = 0; l < c.points.size(); ++l) samples.push_back(g(c.points[l], c.controls[l]));
    prefix.assign(samples.size() + 1, 0.0);
    const double dt = c.stationary ? 1.0 : c.dt;
    for (std::size_t l = 0; l < samples.size(); ++l) prefix[l + 1] = prefix[l] + dt * samples[l];
    mean = prefix.back() / period_of(c);
  }

  // int_0^t along the periodic extension.
  double from_zero(double t) const {
    if (c.stationary) return t * mean;
    const double T = c.period;
    const double cycles = std::floor(t / T);
    const double s = t - cycles * T;
    const double f = s / c.dt;
    const auto l = std::min(static_cast<std::size_t>(f), samples.size() - 1);
    return cycles * T * mean + prefix[l] + (f - static_cast<double>(l)) * c.dt * samples[l];
  }

  double over(double phase, double duration) const { return from_zero(phase + duration) - from_zero(phase); }
};

double steering_integral(const std::vector<Vec2>& path, const Integrand& g, double length) {
  double total = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const Vec2 a = path[k - 1];
    const Vec2 b = path[k];
    const double len = distance(a, b);
    if (len == 0.0) continue;
    const Vec2 u = (b - a) * (1.0 / len);
    total += adaptive_simpson([&](double s) { return g(a + u * s, u); }, 0.0, len, 1e-10 * len / length);
  }
  return total;
}

// Position and control at time s along a unit-speed polyline.
std::pair<Vec2, Vec2> steering_state(const std::vector<Vec2>& path, double s) {
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double len = distance(path[k - 1], path[k]);
    if (len == 0.0) continue;
    const Vec2 u = (path[k] - path[k - 1]) * (1.0 / len);
    if (s <= len || k + 1 == path.size()) return {path[k - 1] + u * std::min(s, len), u};
    s -= len;
  }
  return {path.back(), Vec2{}};
}

}  // namespace

double AlternatingSchedule::total_time() const {
  double t = 0.0;
  for (const ItineraryEntry& e : itinerary) t += e.duration;
  return t;
}

double sample_bound(const DiscretizedSystem& system, const Integrand& g) {
  double m = 0.0;
  for (std::size_t col = 0; col < system.columns(); ++col) {
    m = std::max(m, std::abs(g(system.state(col), system.control(col))));
  }
  return m;
}

AlternatingSchedule synthesize_schedule(std::vector<PeriodicCurve> pieces, std::vector<double> lambda,
                                        const SpatialGrid& grid, std::optional<CumulativeSpec> cumulative,
                                        std::size_t rounds, double steering_bound) {
  if (pieces.empty()) throw PreconditionError("schedule needs at least one piece");
  if (pieces.size() != lambda.size()) throw PreconditionError("one weight per piece is required");
  double sum = 0.0;
  for (const double l : lambda) {
    if (!(l >= 0.0)) throw PreconditionError("schedule weights must be nonnegative");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw PreconditionError("schedule weights must sum to 1");
  if (cumulative && pieces.size() != 2) throw PreconditionError("the cumulative construction needs exactly two pieces");

  AlternatingSchedule s;
  s.steering_bound = steering_bound > 0.0 ? steering_bound : default_steering_bound(grid);
  s.rounds = rounds;
  s.cumulative = cumulative;

  std::vector<double> phase(pieces.size(), 0.0);
  if (cumulative) {
    const PieceIntegral first(pieces[0], cumulative->g);
    if (!(first.mean < 0.0)) {
      throw PreconditionError("the first piece must have a negative mean of the cumulative integrand");
    }
    // Start piece 0 where F(s) = int_0^s (g - mean) peaks, so every partial
    // dwell from there stays below its mean.
    if (!pieces[0].stationary) {
      double best = 0.0;
      for (std::size_t l = 0; l < first.samples.size(); ++l) {
        const double F = first.prefix[l] - first.mean * pieces[0].dt * static_cast<double>(l);
        if (F > best) {
          best = F;
          s.tau = pieces[0].dt * static_cast<double>(l);
        }
      }
    }
    phase[0] = s.tau;
    s.alpha = 2.0 * cumulative->bound * s.steering_bound / (-first.mean);
  }

  // Steering paths between consecutive pieces, shared by every round.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Vec2>> paths;
  auto steer = [&](std::size_t from, std::size_t to) -> const std::vector<Vec2>& {
    auto it = paths.find({from, to});
    if (it != paths.end()) return it->second;
    std::vector<Vec2> p = steering_path(grid, pieces[from].position(phase[from]), pieces[to].position(phase[to]));
    const double len = path_length(p);
    if (len > s.steering_bound * (1.0 + 1e-9)) {
      throw Error("steering", "steering from piece " + std::to_string(from) + " to " + std::to_string(to) +
                                  " takes " + std::to_string(len) + " > T_K = " + std::to_string(s.steering_bound));
    }
    return paths.emplace(std::make_pair(from, to), std::move(p)).first->second;
  };

  double t = 0.0;
  auto add_dwell = [&](std::size_t round, std::size_t j, double duration) {
    if (duration <= 0.0) return;
    ItineraryEntry e;
    e.round = round;
    e.kind = SegmentKind::dwell;
    e.piece = j;
    e.start = t;
    e.duration = duration;
    e.phase = phase[j];
    s.itinerary.push_back(std::move(e));
    t += duration;
  };
  auto add_steer = [&](std::size_t round, std::size_t from, std::size_t to) {
    const std::vector<Vec2>& p = steer(from, to);
    const double len = path_length(p);
    if (len <= 0.0) return;
    ItineraryEntry e;
    e.round = round;
    e.kind = SegmentKind::steer;
    e.piece = to;
    e.from = from;
    e.start = t;
    e.duration = len;
    e.path = p;
    s.itinerary.push_back(std::move(e));
    t += len;
  };

  // Active pieces only: a zero weight contributes no dwell and no visit.
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    if (lambda[j] > 0.0) active.push_back(j);
  }
  for (std::size_t n = 1; n <= rounds; ++n) {
    const auto dn = static_cast<double>(n);
    if (cumulative) {
      const double T0 = period_of(pieces[0]);
      const double T1 = period_of(pieces[1]);
      const double lam = lambda[0];
      add_dwell(n, 0, T0 * std::ceil(s.alpha / T0) + T0 * std::ceil(lam * dn / T0));
      add_steer(n, 0, 1);
      add_dwell(n, 1, std::max(0.0, T1 * std::ceil((1.0 - lam) * dn / T1 - 1.0)));
      add_steer(n, 1, 0);
    } else {
      for (std::size_t k = 0; k < active.size(); ++k) {
        const std::size_t j = active[k];
        const double T = period_of(pieces[j]);
        add_dwell(n, j, T * std::ceil(dn * lambda[j] / T));
        add_steer(n, j, active[(k + 1) % active.size()]);
      }
    }
  }
  s.pieces = std::move(pieces);
  s.lambda = std::move(lambda);
  return s;
}

ScheduleReport verify_schedule(const AlternatingSchedule& s, std::span<const Integrand> g, std::size_t sampled_rounds,
                               double dt) {
  ScheduleReport r;
  r.sampled_rounds = std::min(sampled_rounds, s.rounds);
  const std::size_t ng = g.size();
  std::vector<std::vector<PieceIntegral>> piece_int(ng);
  r.target.assign(ng, 0.0);
  for (std::size_t k = 0; k < ng; ++k) {
    for (std::size_t j = 0; j < s.pieces.size(); ++j) {
      piece_int[k].emplace_back(s.pieces[j], g[k]);
      r.target[k] += s.lambda[j] * piece_int[k][j].mean;
    }
  }
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> steer_cache;
  auto steer_integrals = [&](const ItineraryEntry& e) -> const std::vector<double>& {
    auto it = steer_cache.find({e.from, e.piece});
    if (it != steer_cache.end()) return it->second;
    std::vector<double> v(ng);
    for (std::size_t k = 0; k < ng; ++k) v[k] = steering_integral(e.path, g[k], e.duration);
    return steer_cache.emplace(std::make_pair(e.from, e.piece), std::move(v)).first->second;
  };

  std::vector<double> acc(ng, 0.0);
  double time = 0.0;
  r.max_cumulative = ng > 0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  r.max_cumulative_boundaries = r.max_cumulative;
  std::size_t current_round = s.itinerary.empty() ? 0 : s.itinerary.front().round;

  auto close_round = [&]() {
    r.round_end_time.push_back(time);
    std::vector<double> avg(ng);
    double dist = 0.0;
    for (std::size_t k = 0; k < ng; ++k) {
      avg[k] = time > 0.0 ? acc[k] / time : 0.0;
      dist = std::max(dist, std::abs(avg[k] - r.target[k]));
    }
    r.running.push_back(std::move(avg));
    r.distance.push_back(dist);
  };

  for (const ItineraryEntry& e : s.itinerary) {
    if (e.round != current_round) {
      close_round();
      current_round = e.round;
    }
    const bool sampled = ng > 0 && e.round <= r.sampled_rounds;
    if (sampled) {
      // Running int g_0 on a dt grid within the entry.
      const auto steps = static_cast<std::size_t>(std::ceil(e.duration / dt));
      if (e.kind == SegmentKind::dwell) {
        for (std::size_t l = 1; l <= steps; ++l) {
          const double h = std::min(e.duration, static_cast<double>(l) * dt);
          r.max_cumulative = std::max(r.max_cumulative, acc[0] + piece_int[0][e.piece].over(e.phase, h));
        }
      } else {
        double run = acc[0];
        double prev_s = 0.0;
        auto [x_prev, u_prev] = steering_state(e.path, 0.0);
        double g_prev = g[0](x_prev, u_prev);
        for (std::size_t l = 1; l <= steps; ++l) {
          const double h = std::min(e.duration, static_cast<double>(l) * dt);
          const auto [x, u] = steering_state(e.path, h);
          const double gv = g[0](x, u);
          run += 0.5 * (g_prev + gv) * (h - prev_s);
          g_prev = gv;
          prev_s = h;
          r.max_cumulative = std::max(r.max_cumulative, run);
        }
      }
    }
    if (e.kind == SegmentKind::dwell) {
      for (std::size_t k = 0; k < ng; ++k) acc[k] += piece_int[k][e.piece].over(e.phase, e.duration);
    } else {
      const std::vector<double>& v = steer_integrals(e);
      for (std::size_t k = 0; k < ng; ++k) acc[k] += v[k];
    }
    time += e.duration;
    if (ng > 0) r.max_cumulative_boundaries = std::max(r.max_cumulative_boundaries, acc[0]);
  }
  if (!s.itinerary.empty()) close_round();
  return r;
}

}  // namespace occm
