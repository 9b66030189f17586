#include <doctest.h>

#include <cmath>
#include <numbers>

#include "occm/curve.hpp"
#include "occm/error.hpp"
#include "occm/oracles.hpp"
#include "occm/ratio.hpp"

using namespace occm;

namespace {

constexpr double kPi = std::numbers::pi;

// Measure spread over the lattice band around the circle of radius `r`,
// heaviest nearest the circle, with each cell's control mixture averaging to
// the counterclockwise tangent.
struct CircleFixture {
  MeasureLP lp;
  OptimalMeasure m;
};

CircleFixture circle_measure(double r, std::size_t n, std::size_t nu) {
  const auto grid = build_spatial_grid(Domain::disk(1.0), n, n, GridLayout::vertex);
  auto lp = MeasureLP::assemble(DiscretizedSystem::make(grid, ControlGrid::unit_circle(nu)), Expr::parse("x1*u2"),
                                Expr::parse("1"), {}, 2);
  const double h = grid.hx;
  std::vector<double> w(lp.columns(), 0.0);
  const double step = 2.0 * kPi / static_cast<double>(nu);
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const Vec2 x = grid.cells[i];
    const double closeness = 1.0 - std::abs(norm(x) - r) / (1.5 * h);
    if (closeness <= 0.0) continue;
    double theta = std::atan2(x.y, x.x) + 0.5 * kPi;
    if (theta < 0.0) theta += 2.0 * kPi;
    const double f = theta / step;
    const auto j0 = static_cast<std::size_t>(std::floor(f)) % nu;
    const double frac = f - std::floor(f);
    w[i * nu + j0] += closeness * (1.0 - frac);
    w[i * nu + (j0 + 1) % nu] += closeness * frac;
  }
  double total = 0.0;
  for (const double v : w) total += v;
  for (double& v : w) v /= total;
  auto m = make_measure(lp, w);
  return {std::move(lp), std::move(m)};
}

MeasureLP strip_lp(std::size_t nx) {
  return MeasureLP::assemble(scalar_strip(1.0, nx), Expr::parse("1"), Expr::parse("1"), {}, 2);
}

PeriodicCurve stationary_at(Vec2 x) {
  PeriodicCurve c;
  c.stationary = true;
  c.points = {x};
  c.controls = {Vec2{}};
  return c;
}

}  // namespace

TEST_CASE("tangential measure on a circle traces the circle") {
  const auto f = circle_measure(0.5, 64, 64);
  const auto c = extract_curve(f.m, f.lp);
  REQUIRE_FALSE(c.stationary);
  CHECK(c.jordan);
  CHECK(c.closure_error <= f.lp.system().grid.cell_size());
  // Speed is cos(pi / 64) from the two-direction mixture.
  CHECK(c.period == doctest::Approx(kPi / std::cos(kPi / 64)).epsilon(1e-2));
  // Area over period: (pi / 4) / pi.
  CHECK(c.cycle_average(Expr::parse("x1*u2")) * std::cos(kPi / 64) == doctest::Approx(0.25).epsilon(1e-2));
  CHECK(c.mean_q == doctest::Approx(1.0));
  double rmin = 1.0;
  double rmax = 0.0;
  for (const Vec2 p : c.points) {
    rmin = std::min(rmin, norm(p));
    rmax = std::max(rmax, norm(p));
  }
  CHECK(rmin > 0.5 - 0.03);
  CHECK(rmax < 0.5 + 0.03);
  CHECK(c.position(c.period) == c.points.front());
}

TEST_CASE("balanced controls at one cell give a stationary point") {
  const auto lp = strip_lp(10);
  const auto& sys = lp.system();
  const auto cell = static_cast<std::size_t>(sys.grid.nearest_cell({0.4, 0.0}));
  const std::size_t nu = sys.controls.size();
  SUBCASE("opposite directions") {
    std::vector<double> w(lp.columns(), 0.0);
    w[cell * nu + 0] = 0.5;  // +e1
    w[cell * nu + 1] = 0.5;  // -e1
    const auto c = extract_curve(make_measure(lp, w), lp);
    CHECK(c.stationary);
    CHECK(c.period == 1.0);
    CHECK(c.points.front() == sys.grid.cells[cell]);
  }
  SUBCASE("zero control") {
    std::vector<double> w(lp.columns(), 0.0);
    w[cell * nu + 2] = 1.0;
    const auto c = extract_curve(make_measure(lp, w), lp);
    CHECK(c.stationary);
    CHECK(c.mean_p == doctest::Approx(1.0));
  }
}

TEST_CASE("a drifting atom leaves the domain") {
  const auto lp = strip_lp(10);
  const std::size_t nu = lp.system().controls.size();
  const auto cell = static_cast<std::size_t>(lp.system().grid.nearest_cell({0.4, 0.0}));
  std::vector<double> w(lp.columns(), 0.0);
  w[cell * nu + 0] = 1.0;
  CHECK_THROWS_AS(extract_curve(make_measure(lp, w), lp), ExtractionError);
}

TEST_CASE("empty measure is rejected") {
  const auto lp = strip_lp(10);
  const std::vector<double> w(lp.columns(), 0.0);
  CHECK_THROWS_AS(extract_curve(make_measure(lp, w), lp), PreconditionError);
}

TEST_CASE("jordan test") {
  const std::vector<Vec2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(is_jordan(square));
  const std::vector<Vec2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK_FALSE(is_jordan(bowtie));
  // The closing segment crosses an interior one.
  const std::vector<Vec2> hook{{0, 0}, {2, 0}, {2, 2}, {1, 2}, {1, -1}};
  CHECK_FALSE(is_jordan(hook));
}

TEST_CASE("hausdorff distance") {
  const std::vector<Vec2> a{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const std::vector<Vec2> b{{-0.1, -0.1}, {1.1, -0.1}, {1.1, 1.1}, {-0.1, 1.1}};
  CHECK(hausdorff_distance(a, b) == doctest::Approx(0.1 * std::sqrt(2.0)));
  CHECK(hausdorff_distance(a, a) == 0.0);
  // Densely sampled edges are at distance zero from the coarse square.
  std::vector<Vec2> dense;
  for (int k = 0; k < 40; ++k) dense.push_back({k / 40.0, 0.0});
  for (int k = 0; k < 40; ++k) dense.push_back({1.0, k / 40.0});
  for (int k = 0; k < 40; ++k) dense.push_back({1.0 - k / 40.0, 1.0});
  for (int k = 0; k < 40; ++k) dense.push_back({0.0, 1.0 - k / 40.0});
  CHECK(hausdorff_distance(a, dense) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rectangle optimum traces the rounded rectangle") {
  const Domain d = Domain::rectangle(6, 4);
  const auto grid = build_spatial_grid(d, 48, 32, GridLayout::vertex);
  const auto lp = MeasureLP::assemble(DiscretizedSystem::make(grid, ControlGrid::unit_circle(32)),
                                      Expr::parse("x1*u2"), Expr::parse("1"), {}, 8);
  RatioOptions o;
  o.sense = Sense::maximize;
  const auto s = solve_ratio(lp, o);
  const auto c = extract_curve(s.measure, lp);
  REQUIRE_FALSE(c.stationary);
  CHECK(c.jordan);
  CHECK(c.closure_error <= grid.cell_size());
  CHECK(std::abs(c.ratio() - s.value) <= 5.0 * grid.cell_size());
  const auto oracle = cheeger_set_boundary(d, 512);
  const double hd = hausdorff_distance(c.points, oracle);
  MESSAGE("hausdorff 48x32x32: " << hd << ", cycle ratio " << c.ratio());
  CHECK(hd <= 3.0 * grid.cell_size());
}

TEST_CASE("support clusters") {
  const auto lp = example_cumulative_lp();
  const auto s = solve_ratio(lp);
  const auto clusters = support_clusters(s.measure, lp.system());
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].mass + clusters[1].mass == doctest::Approx(1.0));
  const auto dec = decompose_support(s.measure, lp);
  REQUIRE(dec.pieces.size() == 2);
  for (const auto& p : dec.pieces) CHECK(p.stationary);
  CHECK(dec.lambda[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("single piece schedule is the curve itself") {
  const auto f = circle_measure(0.5, 64, 64);
  const auto c = extract_curve(f.m, f.lp);
  const auto s = synthesize_schedule({c}, {1.0}, f.lp.system().grid, std::nullopt, 5);
  REQUIRE(s.itinerary.size() == 5);
  for (const auto& e : s.itinerary) {
    CHECK(e.kind == SegmentKind::dwell);
    CHECK(std::fmod(e.duration, c.period) == doctest::Approx(0.0).epsilon(1e-9));
  }
  const Integrand g = Expr::parse("x1*u2");
  const auto r = verify_schedule(s, std::span(&g, 1));
  for (std::size_t n = 0; n < 5; ++n) CHECK(r.running[n][0] == doctest::Approx(c.cycle_average(g)).epsilon(1e-12));
}

TEST_CASE("one stationary piece keeps a constant average") {
  const auto grid = build_spatial_grid(Domain::rectangle(2, 2), 4, 4, GridLayout::vertex);
  const auto s = synthesize_schedule({stationary_at({0.5, -0.5})}, {1.0}, grid, std::nullopt, 20);
  const Integrand g = Expr::parse("x1 - 3*x2");
  const auto r = verify_schedule(s, std::span(&g, 1));
  for (const auto& avg : r.running) CHECK(avg[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(r.target[0] == doctest::Approx(2.0));
}

TEST_CASE("weighted two-point alternation converges like C/n") {
  const auto grid = build_spatial_grid(Domain::rectangle(2, 0.2), 20, 2, GridLayout::vertex);
  const auto s = synthesize_schedule({stationary_at({-1, 0}), stationary_at({1, 0})}, {0.3, 0.7}, grid,
                                     std::nullopt, 4000);
  CHECK(s.steering_bound == doctest::Approx(std::hypot(2.0, 0.2)));
  const Integrand g = Expr::parse("x1");
  const auto r = verify_schedule(s, std::span(&g, 1));
  CHECK(r.target[0] == doctest::Approx(0.4));
  CHECK(std::abs(r.running.back()[0] - 0.4) <= 1e-3);
  // n * distance stays bounded.
  double worst = 0.0;
  for (std::size_t n = 100; n <= 4000; ++n) worst = std::max(worst, static_cast<double>(n) * r.distance[n - 1]);
  CHECK(worst < 5.0);
  CHECK(r.distance[3999] < r.distance[399]);
}

TEST_CASE("cumulative schedule for the constrained example") {
  const auto lp = example_cumulative_lp();
  const auto sol = solve_ratio(lp);
  CHECK(std::abs(sol.value) <= 1e-6);
  auto dec = decompose_support(sol.measure, lp);
  REQUIRE(dec.pieces.size() == 2);
  const Expr g1 = Expr::parse("x1");
  if (dec.pieces[0].cycle_average(g1) > 0.0) {
    std::swap(dec.pieces[0], dec.pieces[1]);
    std::swap(dec.lambda[0], dec.lambda[1]);
  }
  const CumulativeSpec spec{g1, sample_bound(lp.system(), g1)};
  CHECK(spec.bound == doctest::Approx(1.0));
  const auto s = synthesize_schedule(dec.pieces, dec.lambda, lp.system().grid, spec, 20000);
  CHECK(s.alpha == doctest::Approx(2.0 * s.steering_bound));
  // Four entries per round: dwell, steer, dwell (absent in round 1), steer.
  CHECK(s.itinerary.front().kind == SegmentKind::dwell);
  const std::vector<Integrand> gs{g1, lp.p()};
  const auto r = verify_schedule(s, gs, 50);
  CHECK(r.max_cumulative <= 0.0);
  CHECK(r.max_cumulative_boundaries <= 0.0);
  CHECK(std::abs(r.running.back()[1]) <= 1e-3);
  CHECK(std::abs(r.running[99][1]) > 1e-3);  // far slower than one hundred rounds
}

TEST_CASE("cumulative schedule needs a negative first piece") {
  const auto grid = build_spatial_grid(Domain::rectangle(2, 0.2), 20, 2, GridLayout::vertex);
  const CumulativeSpec spec{Expr::parse("x1"), 1.0};
  CHECK_THROWS_AS(synthesize_schedule({stationary_at({1, 0}), stationary_at({-1, 0})}, {0.5, 0.5}, grid, spec, 3),
                  PreconditionError);
  CHECK_THROWS_AS(synthesize_schedule({stationary_at({1, 0})}, {0.9}, grid, std::nullopt, 3), PreconditionError);
}

TEST_CASE("steering detours around a nonconvex gap") {
  // Annulus-like region: the straight segment between the two points crosses
  // the hole, so the schedule steers along lattice points.
  const Domain d = Domain::implicit(Expr::parse("0.25 - x1^2 - x2^2"), {-1, 1, -1, 1});
  const auto grid = build_spatial_grid(d, 40, 40, GridLayout::vertex);
  const auto s = synthesize_schedule({stationary_at({-0.8, 0}), stationary_at({0.8, 0})}, {0.5, 0.5}, grid,
                                     std::nullopt, 2);
  bool found = false;
  for (const auto& e : s.itinerary) {
    if (e.kind != SegmentKind::steer) continue;
    found = true;
    CHECK(e.path.size() > 2);
    CHECK(e.duration > 1.6);
    CHECK(e.duration <= s.steering_bound);
    for (const Vec2 p : e.path) CHECK(d.contains(p, 1e-9));
  }
  CHECK(found);
}
