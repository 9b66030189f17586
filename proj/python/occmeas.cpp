#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "occm/config.hpp"
#include "occm/curve.hpp"
#include "occm/error.hpp"
#include "occm/expr.hpp"
#include "occm/generalized.hpp"
#include "occm/oracles.hpp"
#include "occm/pipeline.hpp"
#include "occm/ratio.hpp"

namespace py = pybind11;
using namespace occm;

// Vec2 <-> (x, y) tuples.
namespace pybind11::detail {
template <>
struct type_caster<Vec2> {
  PYBIND11_TYPE_CASTER(Vec2, const_name("tuple[float, float]"));

  bool load(handle src, bool) {
    if (!isinstance<sequence>(src)) return false;
    const auto seq = reinterpret_borrow<sequence>(src);
    if (seq.size() != 2) return false;
    try {
      value = {seq[0].cast<double>(), seq[1].cast<double>()};
    } catch (const cast_error&) {
      return false;
    }
    return true;
  }

  static handle cast(Vec2 v, return_value_policy, handle) { return make_tuple(v.x, v.y).release(); }
};
}  // namespace pybind11::detail

namespace {

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> points_array(const std::vector<Vec2>& pts) {
  py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    a(static_cast<py::ssize_t>(i), 0) = pts[i].x;
    a(static_cast<py::ssize_t>(i), 1) = pts[i].y;
  }
  return out;
}

lp::RowSense row_sense(const std::string& s) {
  if (s == "le") return lp::RowSense::le;
  if (s == "eq") return lp::RowSense::eq;
  throw ConfigError("constraint sense must be 'le' or 'eq', got '" + s + "'");
}

std::vector<AveragedConstraint> constraints_from(const std::vector<std::pair<Expr, std::string>>& cs) {
  std::vector<AveragedConstraint> out;
  for (const auto& [e, s] : cs) out.push_back({e, row_sense(s)});
  return out;
}

MeasureLP assemble_planar(const Domain& d, const Expr& p, const Expr& q, std::size_t nx, std::size_t ny,
                          std::size_t n_u, const std::vector<std::pair<Expr, std::string>>& constraints,
                          int test_degree, bool zero_control, bool allow_nonpositive_q) {
  AssembleOptions o;
  o.allow_nonpositive_q = allow_nonpositive_q;
  return MeasureLP::assemble(
      DiscretizedSystem::make(build_spatial_grid(d, nx, ny == 0 ? nx : ny, GridLayout::vertex),
                              ControlGrid::unit_circle(n_u, zero_control)),
      p, q, constraints_from(constraints), test_degree, o);
}

MeasureLP assemble_scalar(double half_width, std::size_t nx, const Expr& p, const Expr& q,
                          const std::vector<std::pair<Expr, std::string>>& constraints, int test_degree) {
  return MeasureLP::assemble(scalar_strip(half_width, nx), p, q, constraints_from(constraints), test_degree);
}

RatioOptions ratio_options(Sense sense, double tolerance, int max_iterations, double support_threshold) {
  RatioOptions o;
  o.sense = sense;
  o.tolerance = tolerance;
  o.max_iterations = max_iterations;
  o.support_threshold = support_threshold;
  return o;
}

ExtractOptions extract_options(double close_tol, double dt, std::size_t max_steps) {
  ExtractOptions o;
  o.close_tol = close_tol;
  o.dt = dt;
  o.max_steps = max_steps;
  return o;
}

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  for (const auto& [k, v] : s.entries()) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() && *end == '\0') {
      d[py::str(k)] = x;
    } else {
      d[py::str(k)] = v;
    }
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(occmeas, m) {
  m.doc() = "Optimal values, periodic curves and schedules from occupational-measure linear programs";

  // Translators registered later are tried first, so the subclasses win.
  static auto base = py::register_exception<Error>(m, "OccmError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<EvalError>(m, "EvalError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<NoConvergenceError>(m, "NoConvergenceError", base.ptr());
  py::register_exception<ExtractionError>(m, "ExtractionError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::enum_<Sense>(m, "Sense").value("minimize", Sense::minimize).value("maximize", Sense::maximize);

  // --- expressions --------------------------------------------------------
  py::class_<Expr>(m, "Expr")
      .def(py::init([](const std::string& text) { return Expr::parse(text); }), py::arg("text"))
      .def("evaluate", &Expr::evaluate, py::arg("x"), py::arg("u") = Vec2{})
      .def("uses_control", &Expr::uses_control)
      .def("__str__", &Expr::to_string)
      .def("__repr__", [](const Expr& e) { return "Expr('" + e.to_string() + "')"; });
  py::implicitly_convertible<py::str, Expr>();

  // --- domains ------------------------------------------------------------
  py::class_<Domain>(m, "Domain")
      .def_static("rectangle", &Domain::rectangle, py::arg("width"), py::arg("height"))
      .def_static("disk", &Domain::disk, py::arg("radius"))
      .def_static("convex_polygon", &Domain::convex_polygon, py::arg("vertices"))
      .def_static(
          "implicit",
          [](const Expr& g, std::tuple<double, double, double, double> box) {
            return Domain::implicit(g, {std::get<0>(box), std::get<1>(box), std::get<2>(box), std::get<3>(box)});
          },
          py::arg("g"), py::arg("box"))
      .def("translated", &Domain::translated, py::arg("shift"))
      .def("contains", &Domain::contains, py::arg("x"), py::arg("slack") = 0.0)
      .def("project", &Domain::project, py::arg("x"))
      .def("area", &Domain::area)
      .def("perimeter", &Domain::perimeter)
      .def("inradius", &Domain::inradius)
      .def("diameter", &Domain::diameter)
      .def("is_convex", &Domain::is_convex)
      .def("bounding_box",
           [](const Domain& d) {
             const BoundingBox b = d.bounding_box();
             return py::make_tuple(b.xmin, b.xmax, b.ymin, b.ymax);
           })
      .def("boundary_polygon", [](const Domain& d) { return points_array(d.boundary_polygon()); });

  m.def("inner_parallel_area", &inner_parallel_area, py::arg("domain"), py::arg("r"));

  // --- oracles ------------------------------------------------------------
  py::class_<CheegerOracle>(m, "CheegerOracle")
      .def_readonly("r_star", &CheegerOracle::r_star)
      .def_readonly("v_star", &CheegerOracle::v_star)
      .def_readonly("h_star", &CheegerOracle::h_star);
  py::class_<DoubleWellOracle>(m, "DoubleWellOracle")
      .def_readonly("v_star", &DoubleWellOracle::v_star)
      .def_readonly("lambda_", &DoubleWellOracle::lambda)
      .def_readonly("left", &DoubleWellOracle::left)
      .def_readonly("right", &DoubleWellOracle::right);
  m.def("cheeger_constant", &cheeger_constant, py::arg("domain"));
  m.def(
      "cheeger_set_boundary",
      [](const Domain& d, std::size_t n) { return points_array(cheeger_set_boundary(d, n)); }, py::arg("domain"),
      py::arg("n_samples") = 512);
  m.def("double_well_oracle", &double_well_oracle, py::arg("mass"));

  // --- measure LP ---------------------------------------------------------
  py::class_<MeasureLP>(m, "MeasureLP")
      .def_property_readonly("rows", &MeasureLP::rows)
      .def_property_readonly("columns", &MeasureLP::columns)
      .def_property_readonly("test_count", &MeasureLP::test_count)
      .def_property_readonly("constraint_count", &MeasureLP::constraint_count)
      .def("p_values", [](const MeasureLP& lp) { return to_array(lp.p_values()); })
      .def("q_values", [](const MeasureLP& lp) { return to_array(lp.q_values()); })
      .def("sample", [](const MeasureLP& lp, const Expr& g) { return to_array(lp.sample(g)); }, py::arg("g"))
      .def("states", [](const MeasureLP& lp) {
        std::vector<Vec2> xs(lp.columns());
        for (std::size_t j = 0; j < xs.size(); ++j) xs[j] = lp.system().state(j);
        return points_array(xs);
      })
      .def("controls", [](const MeasureLP& lp) {
        std::vector<Vec2> us(lp.columns());
        for (std::size_t j = 0; j < us.size(); ++j) us[j] = lp.system().control(j);
        return points_array(us);
      })
      .def("cell_size", [](const MeasureLP& lp) { return lp.system().grid.cell_size(); });

  m.def("assemble", &assemble_planar, py::arg("domain"), py::arg("p"), py::arg("q") = Expr::parse("1"),
        py::arg("nx") = 48, py::arg("ny") = 0, py::arg("n_u") = 32,
        py::arg("constraints") = std::vector<std::pair<Expr, std::string>>{}, py::arg("test_degree") = 8,
        py::arg("zero_control") = false, py::arg("allow_nonpositive_q") = false,
        "Measure LP on the domain's vertex lattice; ny = 0 means ny = nx.");
  m.def("assemble_scalar", &assemble_scalar, py::arg("half_width"), py::arg("nx"), py::arg("p"),
        py::arg("q") = Expr::parse("1"), py::arg("constraints") = std::vector<std::pair<Expr, std::string>>{},
        py::arg("test_degree") = 8, "Measure LP of x' = u, |u| <= 1 on [-half_width, half_width].");
  m.def("example_cumulative_lp", &example_cumulative_lp, py::arg("nx") = 20, py::arg("test_degree") = 8);
  m.def("example_nonconcave_lp", &example_nonconcave_lp, py::arg("nx") = 20, py::arg("test_degree") = 8);
  m.def("double_well_lp", &double_well_lp, py::arg("mass"), py::arg("half_width") = 1.5, py::arg("nx") = 24,
        py::arg("test_degree") = 8, py::arg("constraint") = "x1");

  py::class_<OptimalMeasure>(m, "OptimalMeasure")
      .def_property_readonly("weights", [](const OptimalMeasure& o) { return to_array(o.weights); })
      .def_readonly("support", &OptimalMeasure::support)
      .def_property_readonly("cell_mass", [](const OptimalMeasure& o) { return to_array(o.cell_mass); })
      .def_readonly("mu_p", &OptimalMeasure::mu_p)
      .def_readonly("mu_q", &OptimalMeasure::mu_q)
      .def_readonly("mu_constraints", &OptimalMeasure::mu_constraints);

  py::class_<RatioSolution>(m, "RatioSolution")
      .def_readonly("value", &RatioSolution::value)
      .def_readonly("measure", &RatioSolution::measure)
      .def_property_readonly("trace",
                             [](const RatioSolution& s) {
                               std::vector<std::pair<double, double>> t;
                               for (const auto& step : s.trace) t.emplace_back(step.v, step.residual);
                               return t;
                             })
      .def_readonly("active", &RatioSolution::active)
      .def_readonly("lp_rows", &RatioSolution::lp_rows)
      .def_readonly("lp_solves", &RatioSolution::lp_solves)
      .def_readonly("simplex_iterations", &RatioSolution::simplex_iterations);

  m.def(
      "solve_ratio",
      [](const MeasureLP& lp, Sense sense, const std::vector<std::pair<Expr, double>>& pins, double tolerance,
         int max_iterations, double support_threshold) {
        std::vector<PinnedRow> rows;
        for (const auto& [e, c] : pins) rows.push_back({lp.sample(e), c});
        return solve_ratio(lp, ratio_options(sense, tolerance, max_iterations, support_threshold), rows);
      },
      py::arg("lp"), py::arg("sense") = Sense::minimize,
      py::arg("pins") = std::vector<std::pair<Expr, double>>{}, py::arg("tolerance") = 1e-9,
      py::arg("max_iterations") = 50, py::arg("support_threshold") = 1e-7,
      "Optimizes mu(p) / mu(q); pins fix mu(expr) = value.");

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("value", &SweepResult::value)
      .def_readonly("pinned", &SweepResult::pinned)
      .def_readonly("solution", &SweepResult::solution)
      .def_property_readonly("points", [](const SweepResult& r) {
        py::list out;
        for (const SweepPoint& p : r.points) out.append(py::make_tuple(p.pinned, p.feasible, p.value));
        return out;
      });

  m.def(
      "pinned_sweep",
      [](const MeasureLP& lp, const std::vector<std::pair<Expr, std::vector<double>>>& pins,
         const std::function<double(std::vector<double>, double, double)>& objective, Sense sense, Sense select,
         std::size_t default_points) {
        std::vector<Pin> ps;
        for (const auto& [e, values] : pins) ps.push_back({e, values});
        SweepOptions o;
        o.ratio.sense = sense;
        o.select = select;
        o.default_points = default_points;
        const SweepObjective V = [&objective](std::span<const double> c, double mp, double mq) {
          return objective(std::vector<double>(c.begin(), c.end()), mp, mq);
        };
        return pinned_sweep(lp, ps, V, o);
      },
      py::arg("lp"), py::arg("pins"), py::arg("objective"), py::arg("sense") = Sense::minimize,
      py::arg("select") = Sense::minimize, py::arg("default_points") = 41,
      "Keeps the best objective(pinned values, mu(p), mu(q)) over the pin lattice; empty value lists use "
      "default_points over the feasible range.");
  m.def("feasible_range", [](const MeasureLP& lp, const Expr& g) { return feasible_range(lp, g); }, py::arg("lp"),
        py::arg("g"));

  // --- curves and schedules -----------------------------------------------
  py::class_<PeriodicCurve>(m, "PeriodicCurve")
      .def_readonly("stationary", &PeriodicCurve::stationary)
      .def_property_readonly("points", [](const PeriodicCurve& c) { return points_array(c.points); })
      .def_property_readonly("controls", [](const PeriodicCurve& c) { return points_array(c.controls); })
      .def_readonly("dt", &PeriodicCurve::dt)
      .def_readonly("period", &PeriodicCurve::period)
      .def_readonly("closure_error", &PeriodicCurve::closure_error)
      .def_readonly("jordan", &PeriodicCurve::jordan)
      .def_readonly("mean_p", &PeriodicCurve::mean_p)
      .def_readonly("mean_q", &PeriodicCurve::mean_q)
      .def("ratio", &PeriodicCurve::ratio)
      .def("cycle_average", [](const PeriodicCurve& c, const Expr& g) { return c.cycle_average(g); }, py::arg("g"))
      .def("position", &PeriodicCurve::position, py::arg("t"));

  m.def(
      "extract_curve",
      [](const OptimalMeasure& meas, const MeasureLP& lp, double close_tol, double dt, std::size_t max_steps) {
        return extract_curve(meas, lp, extract_options(close_tol, dt, max_steps));
      },
      py::arg("measure"), py::arg("lp"), py::arg("close_tol") = 0.0, py::arg("dt") = 0.0,
      py::arg("max_steps") = 1'000'000, "Closed curve through the heaviest support cell (0 picks defaults).");
  m.def(
      "decompose_support",
      [](const OptimalMeasure& meas, const MeasureLP& lp) {
        SupportDecomposition d = decompose_support(meas, lp);
        return py::make_tuple(d.pieces, d.lambda);
      },
      py::arg("measure"), py::arg("lp"), "Returns (pieces, weights), heaviest first.");
  m.def(
      "is_jordan", [](const std::vector<Vec2>& pts) { return is_jordan(pts); }, py::arg("closed_polyline"));
  m.def(
      "hausdorff_distance",
      [](const std::vector<Vec2>& a, const std::vector<Vec2>& b) { return hausdorff_distance(a, b); }, py::arg("a"),
      py::arg("b"));

  py::class_<AlternatingSchedule>(m, "AlternatingSchedule")
      .def_readonly("pieces", &AlternatingSchedule::pieces)
      .def_readonly("lambda_", &AlternatingSchedule::lambda)
      .def_readonly("steering_bound", &AlternatingSchedule::steering_bound)
      .def_readonly("rounds", &AlternatingSchedule::rounds)
      .def_readonly("tau", &AlternatingSchedule::tau)
      .def_readonly("alpha", &AlternatingSchedule::alpha)
      .def("total_time", &AlternatingSchedule::total_time)
      .def_property_readonly("itinerary", [](const AlternatingSchedule& s) {
        py::list out;
        for (const ItineraryEntry& e : s.itinerary) {
          out.append(py::make_tuple(e.round, e.kind == SegmentKind::dwell ? "dwell" : "steer", e.piece, e.start,
                                    e.duration));
        }
        return out;
      });

  m.def(
      "synthesize_schedule",
      [](std::vector<PeriodicCurve> pieces, std::vector<double> lambda, const MeasureLP& lp,
         std::optional<Expr> cumulative, std::size_t rounds) {
        std::optional<CumulativeSpec> spec;
        if (cumulative) spec = CumulativeSpec{*cumulative, sample_bound(lp.system(), *cumulative)};
        return synthesize_schedule(std::move(pieces), std::move(lambda), lp.system().grid, spec, rounds);
      },
      py::arg("pieces"), py::arg("weights"), py::arg("lp"), py::arg("cumulative") = py::none(),
      py::arg("rounds") = 1000,
      "Cyclic alternation of the pieces; `cumulative` keeps int_0^T g <= 0 for a single constraint g.");

  py::class_<ScheduleReport>(m, "ScheduleReport")
      .def_readonly("target", &ScheduleReport::target)
      .def_readonly("round_end_time", &ScheduleReport::round_end_time)
      .def_readonly("running", &ScheduleReport::running)
      .def_readonly("distance", &ScheduleReport::distance)
      .def_readonly("max_cumulative", &ScheduleReport::max_cumulative)
      .def_readonly("max_cumulative_boundaries", &ScheduleReport::max_cumulative_boundaries)
      .def_readonly("sampled_rounds", &ScheduleReport::sampled_rounds);

  m.def(
      "verify_schedule",
      [](const AlternatingSchedule& s, const std::vector<Expr>& g, std::size_t sampled_rounds, double dt) {
        const std::vector<Integrand> gs(g.begin(), g.end());
        return verify_schedule(s, gs, sampled_rounds, dt);
      },
      py::arg("schedule"), py::arg("g"), py::arg("sampled_rounds") = 50, py::arg("dt") = 0.01);

  // --- generalized Cheeger ------------------------------------------------
  m.def("antiderivative_P1", &antiderivative_P1, py::arg("P"), py::arg("x"), py::arg("tol") = 1e-10);
  m.def(
      "solve_generalized",
      [](const Domain& d, const Expr& P, const Expr& Q, std::size_t nx, std::size_t ny, std::size_t n_u,
         int test_degree, bool allow_nonpositive_q) {
        GeneralizedCheegerProblem p;
        p.domain = d;
        p.P = P;
        p.Q = Q;
        p.nx = nx;
        p.ny = ny == 0 ? nx : ny;
        p.n_u = n_u;
        p.test_degree = test_degree;
        p.allow_nonpositive_q = allow_nonpositive_q;
        GeneralizedCheegerResult r = solve_generalized(p);
        return py::make_tuple(r.solution, r.curve, r.warnings);
      },
      py::arg("domain"), py::arg("P") = Expr::parse("1"), py::arg("Q") = Expr::parse("1"), py::arg("nx") = 64,
      py::arg("ny") = 0, py::arg("n_u") = 32, py::arg("test_degree") = 8, py::arg("allow_nonpositive_q") = false,
      "Maximizes mu(P1 u2) / mu(Q); returns (solution, curve, warnings).");

  // --- configured runs ----------------------------------------------------
  py::class_<RunResult>(m, "RunResult")
      .def_property_readonly("summary", [](const RunResult& r) { return summary_dict(r.summary); })
      .def_property_readonly("summary_text", [](const RunResult& r) { return r.summary.text(); })
      .def_property_readonly("warnings", [](const RunResult& r) { return r.summary.warnings(); })
      .def_readonly("pieces", &RunResult::pieces)
      .def_readonly("weights", &RunResult::lambda)
      .def_readonly("measure", &RunResult::measure)
      .def("svg", &render_svg)
      .def("measure_csv",
           [](const RunResult& r) {
             if (!r.lp || !r.measure) throw PreconditionError("run has no measure");
             std::ostringstream out;
             write_measure_csv(out, *r.lp, *r.measure);
             return out.str();
           })
      .def("curve_csv", [](const RunResult& r) {
        std::ostringstream out;
        write_curve_csv(out, r);
        return out.str();
      });

  m.def(
      "run_config", [](const std::string& text) { return run_pipeline(parse_config(text)); }, py::arg("text"),
      "Runs a configuration given as `key = value` text.");
  m.def(
      "run",
      [](const std::string& path, const std::string& svg, const std::string& csv_dir, bool quiet) {
        CliOptions o;
        o.svg_path = svg;
        o.csv_dir = csv_dir;
        o.quiet = quiet;
        std::ostringstream out;
        std::ostringstream err;
        const int code = run(path, o, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("config_path"), py::arg("svg") = "", py::arg("csv_dir") = "", py::arg("quiet") = false,
      "Same as the CLI `solve`; returns (exit code, stdout text, diagnostic text).");
}
