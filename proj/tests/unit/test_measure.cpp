#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "occm/error.hpp"
#include "occm/measure.hpp"

using namespace occm;

namespace {

SpatialGrid single_cell() {
  SpatialGrid g;
  g.nx = g.ny = 1;
  g.box = {-1, 1, -1, 1};
  g.hx = g.hy = 2.0;
  g.cells = {{0, 0}};
  g.lattice = {{0, 0}};
  g.lookup = {0};
  return g;
}

// Occupational measure of the unit-speed circle of radius `radius`, projected
// onto the nearest grid cell and the nearest control direction.
std::vector<double> circle_measure(const DiscretizedSystem& sys, double radius, std::size_t samples) {
  std::vector<double> w(sys.columns(), 0.0);
  const std::size_t nu = sys.controls.size();
  for (std::size_t s = 0; s < samples; ++s) {
    const double t = 2.0 * std::numbers::pi * (static_cast<double>(s) + 0.5) / static_cast<double>(samples);
    const Vec2 x{radius * std::cos(t), radius * std::sin(t)};
    const double heading = t + 0.5 * std::numbers::pi;
    auto j = static_cast<std::size_t>(std::lround(heading / (2.0 * std::numbers::pi / static_cast<double>(nu)))) % nu;
    const auto cell = static_cast<std::size_t>(sys.grid.nearest_cell(x));
    w[cell * nu + j] += 1.0 / static_cast<double>(samples);
  }
  return w;
}

}  // namespace

TEST_CASE("single symmetric cell") {
  const auto sys = DiscretizedSystem::make(single_cell(), ControlGrid::unit_circle(2));
  const auto lp = MeasureLP::assemble(sys, Expr::parse("x1"), Expr::parse("1"), {}, 1);
  REQUIRE(lp.test_count() == 2);
  REQUIRE(lp.rows() == 3);
  // Monomials of degree one: x2 first, then x1.
  CHECK(lp.monomials()[0] == std::pair{0, 1});
  CHECK(lp.monomials()[1] == std::pair{1, 0});
  CHECK(lp.stationarity_entry(0, 1) == doctest::Approx(1.0));
  CHECK(lp.stationarity_entry(1, 1) == doctest::Approx(-1.0));
  CHECK(lp.stationarity_entry(0, 0) == 0.0);
  CHECK(lp.stationarity_entry(1, 0) == 0.0);

  const std::vector<double> half{0.5, 0.5};
  CHECK(stationarity_residual(lp, half) <= 1e-15);

  const std::vector<double> zero(2, 0.0);
  MeasureProgram program(lp, zero);
  const auto sol = lp::solve(program);
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.primal[0] == doctest::Approx(0.5));
  CHECK(sol.primal[1] == doctest::Approx(0.5));
}

TEST_CASE("test-function count and constant integrand") {
  const auto grid = build_spatial_grid(Domain::rectangle(6, 4), 12, 8, GridLayout::vertex);
  const auto sys = DiscretizedSystem::make(grid, ControlGrid::unit_circle(8));
  const auto lp = MeasureLP::assemble(sys, Expr::parse("x1*u2"), Expr::parse("1"), {}, 8);
  CHECK(lp.test_count() == 44);
  CHECK(lp.rows() == 45);
  for (double q : lp.q_values()) CHECK(q == 1.0);

  const std::vector<double> cost(lp.p_values().begin(), lp.p_values().end());
  MeasureProgram program(lp, cost);
  const auto sol = lp::solve(program);
  REQUIRE(sol.status == lp::Status::optimal);
  const auto m = make_measure(lp, sol.primal);
  CHECK(m.mu_q == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stationarity_residual(lp, m.weights) <= 1e-8);
  for (std::size_t i = 0; i < m.cell_mass.size(); ++i) CHECK(norm(m.conditional_controls[i]) <= 1.0 + 1e-12);
}

TEST_CASE("averaged constraints and slack columns") {
  const auto grid = build_spatial_grid(Domain::rectangle(2, 0.2), 10, 2, GridLayout::vertex);
  const auto sys = DiscretizedSystem::make(grid, ControlGrid::unit_circle(2, true));
  const auto lp = MeasureLP::assemble(sys, Expr::parse("1 - x1 - x1^2"), Expr::parse("1"),
                                      {{Expr::parse("x1"), lp::RowSense::le}}, 4);
  CHECK(lp.rows() == 1 + 14 + 1);
  const std::vector<double> cost(lp.p_values().begin(), lp.p_values().end());
  MeasureProgram program(lp, cost);
  CHECK(program.cols() == lp.columns() + 1);
  const auto dense = lp.to_standard_lp(cost);
  CHECK(dense.cols() == program.cols());
  CHECK(dense.kinds().back() == lp::ColumnKind::slack);
}

TEST_CASE("q must be positive") {
  const auto grid = build_spatial_grid(Domain::rectangle(6, 4), 4, 4);
  const auto sys = DiscretizedSystem::make(grid, ControlGrid::unit_circle(4));
  try {
    (void)MeasureLP::assemble(sys, Expr::parse("x1*u2"), Expr::parse("x1"), {}, 2);
    FAIL("expected PreconditionError");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("cell") != std::string::npos);
  }
  CHECK_THROWS_AS(MeasureLP::assemble(sys, Expr::parse("1"), Expr::parse("0"), {}, 2), PreconditionError);
  CHECK_NOTHROW(MeasureLP::assemble(sys, Expr::parse("1"), Expr::parse("0"), {}, 2, {.allow_nonpositive_q = true}));
  CHECK_THROWS_AS(MeasureLP::assemble(sys, Expr::parse("1"), Expr::parse("1"), {}, 0), PreconditionError);
}

TEST_CASE("structured pricing matches column-by-column pricing") {
  const auto grid = build_spatial_grid(Domain::disk(1.5).translated({0.3, -0.2}), 9, 7);
  const auto sys = DiscretizedSystem::make(grid, ControlGrid::unit_circle(6, true));
  const auto lp = MeasureLP::assemble(sys, Expr::parse("x1*u2 + x2"), Expr::parse("2 + u1"),
                                      {{Expr::parse("x1 - 0.1"), lp::RowSense::le},
                                       {Expr::parse("x2*u1"), lp::RowSense::eq}},
                                      5);
  std::vector<double> cost = lp.sample(Expr::parse("x1^2 - u2"));
  std::vector<PinnedRow> pins{{lp.sample(Expr::parse("abs(x2)")), 0.3}};
  MeasureProgram program(lp, cost, pins);
  const auto dense = [&] {
    lp::StandardLP s = lp.to_standard_lp(cost);
    std::vector<double> row(s.cols(), 0.0);
    for (std::size_t j = 0; j < lp.columns(); ++j) row[j] = pins[0].values[j];
    s.add_row(row, pins[0].rhs);
    return s;
  }();
  REQUIRE(dense.rows() == program.rows());
  REQUIRE(dense.cols() == program.cols());

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> y(program.rows());
  std::vector<double> d1(program.cols());
  std::vector<double> d2(program.cols());
  std::vector<double> d3(program.cols());
  for (int trial = 0; trial < 5; ++trial) {
    for (double& v : y) v = g(rng);
    const double weight = trial == 0 ? 0.0 : 1.0;
    program.price(y, weight, d1);
    program.lp::ColumnSource::price(y, weight, d2);
    dense.price(y, weight, d3);
    for (std::size_t j = 0; j < d1.size(); ++j) {
      CHECK(d1[j] == doctest::Approx(d2[j]).epsilon(1e-12));
      CHECK(d1[j] == doctest::Approx(d3[j]).epsilon(1e-12));
    }
  }
  CHECK(program.rhs()[0] == 1.0);
  CHECK(program.rhs().back() == 0.3);

  // Both routes reach the same optimum.
  const auto a = lp::solve(program);
  const auto b = lp::solve(dense);
  REQUIRE(a.status == b.status);
  if (a.status == lp::Status::optimal) CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
}

TEST_CASE("realization points") {
  // Two cells, uniform weight, g values +1 and -1.
  SpatialGrid grid = single_cell();
  grid.cells = {{-1, 0}, {1, 0}};
  grid.lattice = {{0, 0}, {1, 0}};
  const auto sys = DiscretizedSystem::make(grid, ControlGrid::unit_circle(4, true));
  const auto lp = MeasureLP::assemble(sys, Expr::parse("x1"), Expr::parse("1"), {}, 1);
  std::vector<double> w(sys.columns(), 0.0);
  w[0 * 5 + 4] = 0.5;
  w[1 * 5 + 4] = 0.5;
  const auto uniform = make_measure(lp, w);
  CHECK(realization_point(uniform, sys, Expr::parse("x1")) == 0.0);
  CHECK(realization_point(uniform, sys, Expr::parse("1 - x1 - x1^2")) == 0.0);

  std::vector<double> dirac(sys.columns(), 0.0);
  dirac[1 * 5 + 1] = 1.0;  // x = (1, 0), u = e2
  const auto m = make_measure(lp, dirac);
  CHECK(realization_point(m, sys, Expr::parse("x1*u2")) == 1.0);
  CHECK(m.support == std::vector<std::size_t>{6});
  CHECK(m.conditional_controls[1] == Vec2{0, 1});
}

TEST_CASE("stationary Dirac columns are feasible") {
  const auto grid = build_spatial_grid(Domain::disk(2), 16, 16);
  const auto sys = DiscretizedSystem::make(grid, ControlGrid::unit_circle(8, true));
  const auto lp = MeasureLP::assemble(sys, Expr::parse("1"), Expr::parse("1"), {}, 8);
  for (std::size_t i = 0; i < grid.cells.size(); i += 7) {
    std::vector<double> w(sys.columns(), 0.0);
    w[i * 9 + 8] = 1.0;
    CHECK(stationarity_residual(lp, w) == 0.0);
  }
}

TEST_CASE("traced circle is nearly stationary and improves under refinement") {
  double previous = 1e300;
  for (const auto& [n, nu] : {std::pair<std::size_t, std::size_t>{32, 16}, {64, 32}, {128, 64}}) {
    const auto grid = build_spatial_grid(Domain::disk(2), n, n);
    const auto sys = DiscretizedSystem::make(grid, ControlGrid::unit_circle(nu));
    const auto lp = MeasureLP::assemble(sys, Expr::parse("1"), Expr::parse("1"), {}, 4);
    const double res = stationarity_residual(lp, circle_measure(sys, 1.0, 200000));
    INFO("n = " << n << ", residual = " << res);
    if (n == 64) CHECK(res <= 0.05);
    CHECK(res < previous);
    previous = res;
  }
}
