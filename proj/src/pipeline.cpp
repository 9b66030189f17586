#include "occm/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "occm/error.hpp"
#include "occm/generalized.hpp"
#include "occm/oracles.hpp"

namespace occm {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Coordinates in SVG output: fixed precision keeps the bytes stable.
std::string coord(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5f", v);
  std::string s = buf;
  if (s == "-0.00000") s = "0.00000";
  return s;
}

DiscretizedSystem make_system(const RunConfig& c) {
  if (!c.domain) return scalar_strip(c.strip_half_width, c.nx);
  return DiscretizedSystem::make(build_spatial_grid(*c.domain, c.nx, c.ny, GridLayout::vertex),
                                 ControlGrid::unit_circle(c.n_u, c.zero_control));
}

std::vector<AveragedConstraint> make_constraints(const RunConfig& c) {
  std::vector<AveragedConstraint> out;
  for (const ConstraintSpec& s : c.constraints) out.push_back({Expr::parse(s.expr), s.sense});
  return out;
}

RatioOptions ratio_options(const RunConfig& c, Sense sense) {
  RatioOptions o;
  o.sense = sense;
  o.tolerance = c.tolerance;
  o.max_iterations = c.max_iterations;
  o.support_threshold = c.support_threshold;
  return o;
}

void report_solution(RunSummary& s, const MeasureLP& lp, const RatioSolution& sol) {
  s.set("value", sol.value);
  s.set("lp_rows", static_cast<double>(sol.lp_rows));
  s.set("lp_columns", static_cast<double>(lp.columns()));
  s.set("lp_solves", static_cast<double>(sol.lp_solves));
  s.set("simplex_iterations", static_cast<double>(sol.simplex_iterations));
  s.set("dinkelbach_steps", static_cast<double>(sol.trace.size()));
  s.set("dinkelbach_residual", sol.trace.empty() ? 0.0 : sol.trace.back().residual);
  s.set("stationarity_residual", stationarity_residual(lp, sol.measure.weights));
  s.set("support_atoms", static_cast<double>(sol.measure.support.size()));
  s.set("support_cells", static_cast<double>(sol.measure.support_cells(lp.system()).size()));
  s.set("mu_p", sol.measure.mu_p);
  s.set("mu_q", sol.measure.mu_q);
  for (std::size_t k = 0; k < lp.constraint_count(); ++k) {
    const std::string base = "constraint." + std::to_string(k);
    s.set(base + ".mu", sol.measure.mu_constraints[k]);
    s.set(base + ".active", sol.active[k] ? "true" : "false");
  }
}

void report_pieces(RunResult& r) {
  RunSummary& s = r.summary;
  s.set("pieces", static_cast<double>(r.pieces.size()));
  for (std::size_t k = 0; k < r.pieces.size(); ++k) {
    const PeriodicCurve& c = r.pieces[k];
    const std::string base = "piece." + std::to_string(k);
    s.set(base + ".lambda", r.lambda[k]);
    s.set(base + ".stationary", c.stationary ? "true" : "false");
    if (c.stationary) {
      s.set(base + ".x1", c.points.front().x);
      s.set(base + ".x2", c.points.front().y);
    } else {
      s.set(base + ".period", c.period);
      s.set(base + ".closure_error", c.closure_error);
      s.set(base + ".jordan", c.jordan ? "true" : "false");
    }
    s.set(base + ".cycle_ratio", c.ratio());
  }
}

void extract_pieces(RunResult& r, bool required) {
  try {
    SupportDecomposition dec = decompose_support(*r.measure, *r.lp);
    r.pieces = std::move(dec.pieces);
    r.lambda = std::move(dec.lambda);
  } catch (const ExtractionError& e) {
    if (required) throw;
    r.summary.warn(std::string("curve extraction failed: ") + e.what());
  }
  report_pieces(r);
}

void add_cheeger_oracle(RunResult& r) {
  const Domain& d = *r.config.domain;
  if (!d.is_convex()) return;
  CheegerOracle o;
  try {
    o = cheeger_constant(d);
  } catch (const DomainError& e) {
    r.summary.warn(std::string("no oracle: ") + e.what());
    return;
  }
  const double value = r.summary.number("value");
  r.summary.set("oracle.value", o.v_star);
  r.summary.set("oracle.delta", value - o.v_star);
  OracleOverlay overlay;
  if (d.kind() == Domain::Kind::disk) {
    overlay.circle = true;
    overlay.center = d.offset();
    overlay.radius = d.radius();
  }
  overlay.polyline = cheeger_set_boundary(d, 512);
  if (!r.pieces.empty() && !r.pieces.front().stationary) {
    r.summary.set("oracle.hausdorff", hausdorff_distance(r.pieces.front().points, overlay.polyline));
  }
  if (overlay.circle) overlay.polyline.clear();
  r.oracle = std::move(overlay);
}

void run_ratio_like(RunResult& r, const Integrand& p, const Integrand& q, Sense sense, bool schedule) {
  const RunConfig& c = r.config;
  r.lp = MeasureLP::assemble(make_system(c), p, q, make_constraints(c), c.test_degree);
  const RatioSolution sol = solve_ratio(*r.lp, ratio_options(c, sense));
  report_solution(r.summary, *r.lp, sol);
  r.measure = sol.measure;
  r.trace = sol.trace;
  extract_pieces(r, schedule);
}

void run_schedule(RunResult& r) {
  const RunConfig& c = r.config;
  run_ratio_like(r, Expr::parse(c.p), Expr::parse(c.q), c.sense, true);
  const MeasureLP& lp = *r.lp;
  std::optional<CumulativeSpec> cumulative;
  std::vector<PeriodicCurve> pieces = r.pieces;
  std::vector<double> lambda = r.lambda;
  if (c.schedule_cumulative) {
    const Integrand g = Expr::parse(c.constraints[*c.schedule_cumulative].expr);
    if (pieces.size() == 2 && pieces[0].cycle_average(g) > pieces[1].cycle_average(g)) {
      std::swap(pieces[0], pieces[1]);
      std::swap(lambda[0], lambda[1]);
    }
    cumulative = CumulativeSpec{g, sample_bound(lp.system(), g)};
  }
  // Renormalize against rounding so the weights sum to one exactly enough.
  double total = 0.0;
  for (const double l : lambda) total += l;
  for (double& l : lambda) l /= total;
  r.schedule = synthesize_schedule(std::move(pieces), std::move(lambda), lp.system().grid, cumulative,
                                   c.schedule_rounds);
  std::vector<Integrand> g{lp.p(), lp.q()};
  std::vector<std::string> names{"p", "q"};
  for (std::size_t k = 0; k < lp.constraint_count(); ++k) {
    g.push_back(lp.constraints()[k].expr);
    names.push_back("constraint." + std::to_string(k));
  }
  if (cumulative) {
    g.insert(g.begin(), cumulative->g);
    names.insert(names.begin(), "cumulative");
  }
  const ScheduleReport rep = verify_schedule(*r.schedule, g, c.schedule_sampled_rounds, c.schedule_dt);
  RunSummary& s = r.summary;
  const AlternatingSchedule& sch = *r.schedule;
  s.set("schedule.rounds", static_cast<double>(sch.rounds));
  s.set("schedule.entries", static_cast<double>(sch.itinerary.size()));
  s.set("schedule.steering_bound", sch.steering_bound);
  s.set("schedule.total_time", sch.total_time());
  if (cumulative) {
    s.set("schedule.tau", sch.tau);
    s.set("schedule.alpha", sch.alpha);
    s.set("schedule.max_cumulative", rep.max_cumulative);
    s.set("schedule.max_cumulative_boundaries", rep.max_cumulative_boundaries);
    s.set("schedule.sampled_rounds", static_cast<double>(rep.sampled_rounds));
  }
  if (!rep.running.empty()) {
    const std::size_t offset = cumulative ? 1 : 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      s.set("schedule.target." + names[k], rep.target[k]);
      s.set("schedule.running." + names[k], rep.running.back()[k]);
    }
    s.set("schedule.running_ratio", rep.running.back()[offset] / rep.running.back()[offset + 1]);
    s.set("schedule.distance", rep.distance.back());
  }
}

void run_sweep(RunResult& r) {
  const RunConfig& c = r.config;
  r.lp = MeasureLP::assemble(make_system(c), Expr::parse(c.p), Expr::parse(c.q), make_constraints(c), c.test_degree);
  std::vector<Pin> pins;
  for (const PinSpec& p : c.pins) pins.push_back({Expr::parse(p.expr), p.values});
  const Expr v = Expr::parse(c.sweep_value);
  const SweepObjective objective = [&v](std::span<const double> pinned, double mu_p, double mu_q) {
    const Vec2 x{pinned.size() > 0 ? pinned[0] : 0.0, pinned.size() > 1 ? pinned[1] : 0.0};
    return v.evaluate(x, {mu_p, mu_q});
  };
  SweepOptions o;
  o.ratio = ratio_options(c, c.sense);
  o.select = c.sweep_select;
  o.default_points = c.sweep_points;
  const SweepResult res = pinned_sweep(*r.lp, pins, objective, o);
  report_solution(r.summary, *r.lp, res.solution);
  r.summary.set("value", res.value);
  r.summary.set("ratio_value", res.solution.value);
  for (std::size_t k = 0; k < res.pinned.size(); ++k) r.summary.set("pin." + std::to_string(k) + ".value", res.pinned[k]);
  std::size_t feasible = 0;
  for (const SweepPoint& p : res.points) feasible += p.feasible ? 1 : 0;
  r.summary.set("sweep.points", static_cast<double>(res.points.size()));
  r.summary.set("sweep.feasible_points", static_cast<double>(feasible));
  r.measure = res.solution.measure;
  r.trace = res.solution.trace;
  extract_pieces(r, false);
}

void run_double_well(RunResult& r) {
  const RunConfig& c = r.config;
  const DoubleWellOracle oracle = double_well_oracle(c.dw_mass);
  r.lp = double_well_lp(c.dw_mass, c.dw_half_width, c.nx, c.test_degree, c.dw_constraint);
  const RatioSolution sol = solve_ratio(*r.lp, ratio_options(c, Sense::minimize));
  report_solution(r.summary, *r.lp, sol);
  r.measure = sol.measure;
  r.trace = sol.trace;
  double left = 0.0;
  const auto& grid = r.lp->system().grid;
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    if (grid.cells[i].x < 0.0) left += sol.measure.cell_mass[i];
  }
  r.summary.set("lambda", left);
  r.summary.set("oracle.value", oracle.v_star);
  r.summary.set("oracle.delta", sol.value - oracle.v_star);
  r.summary.set("oracle.lambda", oracle.lambda);
  r.summary.set("oracle.lambda_delta", left - oracle.lambda);
  extract_pieces(r, false);
}

void run_generalized(RunResult& r) {
  const RunConfig& c = r.config;
  GeneralizedCheegerProblem p;
  p.domain = *c.domain;
  p.P = Expr::parse(c.P);
  p.Q = Expr::parse(c.Q);
  p.nx = c.nx;
  p.ny = c.ny;
  p.n_u = c.n_u;
  p.test_degree = c.test_degree;
  p.allow_nonpositive_q = c.allow_nonpositive_q;
  GeneralizedCheegerResult g = solve_generalized(p, ratio_options(c, Sense::maximize));
  report_solution(r.summary, g.lp, g.solution);
  r.lp = std::move(g.lp);
  r.measure = g.solution.measure;
  r.trace = g.solution.trace;
  r.pieces = {std::move(g.curve)};
  r.lambda = {1.0};
  for (std::string& w : g.warnings) r.summary.warn(std::move(w));
  report_pieces(r);
}

// ---------------------------------------------------------------------------

std::string points_attr(std::span<const Vec2> pts, bool close) {
  std::string s;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k) s += ' ';
    s += coord(pts[k].x) + "," + coord(pts[k].y);
  }
  if (close && !pts.empty()) s += " " + coord(pts.front().x) + "," + coord(pts.front().y);
  return s;
}

constexpr const char* kPalette[] = {"#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void RunSummary::set(const std::string& key, double value) { set(key, num(value)); }

void RunSummary::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

std::optional<std::string> RunSummary::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

double RunSummary::number(const std::string& key) const {
  const auto v = get(key);
  if (!v) throw std::out_of_range("summary has no key '" + key + "'");
  return std::stod(*v);
}

std::string RunSummary::text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + ": " + v + "\n";
  for (const std::string& w : warnings_) out += "warning: " + w + "\n";
  return out;
}

RunResult run_pipeline(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r;
  r.config = config;
  r.summary.set("mode", std::string(to_string(config.mode)));
  r.summary.set("domain", config.domain_kind);
  switch (config.mode) {
    case Mode::ratio:
      run_ratio_like(r, Expr::parse(config.p), Expr::parse(config.q), config.sense, false);
      break;
    case Mode::cheeger:
      run_ratio_like(r, Expr::parse("x1*u2"), Expr::parse("1"), Sense::maximize, false);
      add_cheeger_oracle(r);
      break;
    case Mode::generalized_cheeger:
      if (!config.domain) throw ConfigError("generalized_cheeger needs a planar domain");
      run_generalized(r);
      break;
    case Mode::double_well:
      run_double_well(r);
      break;
    case Mode::pinned_sweep:
      run_sweep(r);
      break;
    case Mode::schedule:
      run_schedule(r);
      break;
  }
  for (const auto& [key, value] : r.summary.entries()) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    const bool numeric = ec == std::errc{} && ptr == value.data() + value.size();
    if ((numeric && !std::isfinite(v)) || value == "nan" || value == "-nan" || value == "inf" || value == "-inf") {
      throw Error("numerical", "summary value '" + key + "' is not finite");
    }
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void write_measure_csv(std::ostream& out, const MeasureLP& lp, const OptimalMeasure& m) {
  const DiscretizedSystem& sys = lp.system();
  out << "i,j,x1,x2,u1,u2,weight\n";
  for (std::size_t col = 0; col < m.weights.size(); ++col) {
    if (m.weights[col] == 0.0) continue;
    const Vec2 x = sys.state(col);
    const Vec2 u = sys.control(col);
    out << sys.cell_of(col) << ',' << sys.control_of(col) << ',' << exact(x.x) << ',' << exact(x.y) << ','
        << exact(u.x) << ',' << exact(u.y) << ',' << exact(m.weights[col]) << '\n';
  }
}

std::vector<MeasureAtom> read_measure_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "i,j,x1,x2,u1,u2,weight") throw Error("io", "measure CSV header mismatch");
  std::vector<MeasureAtom> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 7) throw Error("io", "measure CSV row " + std::to_string(row) + " has " + std::to_string(f.size()) + " fields");
    try {
      MeasureAtom a;
      a.cell = std::stoul(f[0]);
      a.control = std::stoul(f[1]);
      a.x = {std::stod(f[2]), std::stod(f[3])};
      a.u = {std::stod(f[4]), std::stod(f[5])};
      a.weight = std::stod(f[6]);
      out.push_back(a);
    } catch (const std::logic_error&) {
      throw Error("io", "measure CSV row " + std::to_string(row) + " is not numeric");
    }
  }
  return out;
}

double integrate_atoms(std::span<const MeasureAtom> atoms, const Integrand& g) {
  double s = 0.0;
  for (const MeasureAtom& a : atoms) s += a.weight * g(a.x, a.u);
  return s;
}

void write_curve_csv(std::ostream& out, const RunResult& r) {
  out << "t,x1,x2,u1,u2,piece_index\n";
  auto row = [&](double t, Vec2 x, Vec2 u, long piece) {
    out << num(t) << ',' << exact(x.x) << ',' << exact(x.y) << ',' << exact(u.x) << ',' << exact(u.y) << ',' << piece
        << '\n';
  };
  if (!r.schedule) {
    for (std::size_t k = 0; k < r.pieces.size(); ++k) {
      const PeriodicCurve& c = r.pieces[k];
      for (std::size_t l = 0; l < c.points.size(); ++l) {
        row(static_cast<double>(l) * c.dt, c.points[l], c.controls[l], static_cast<long>(k));
      }
    }
    return;
  }
  const AlternatingSchedule& s = *r.schedule;
  const std::size_t rounds = std::min<std::size_t>(s.rounds, r.config.schedule_sampled_rounds);
  const double dt = r.config.schedule_dt;
  for (const ItineraryEntry& e : s.itinerary) {
    if (e.round > rounds) break;
    const auto steps = static_cast<std::size_t>(std::ceil(e.duration / dt));
    for (std::size_t l = 0; l < steps; ++l) {
      const double h = static_cast<double>(l) * dt;
      if (e.kind == SegmentKind::dwell) {
        const PeriodicCurve& c = s.pieces[e.piece];
        const Vec2 x = c.position(e.phase + h);
        Vec2 u = c.controls.front();
        if (!c.stationary) {
          const double ph = std::fmod(e.phase + h, c.period);
          u = c.controls[std::min(static_cast<std::size_t>(ph / c.dt), c.controls.size() - 1)];
        }
        row(e.start + h, x, u, static_cast<long>(e.piece));
      } else {
        double rest = h;
        Vec2 x = e.path.back();
        Vec2 u;
        for (std::size_t k = 1; k < e.path.size(); ++k) {
          const double len = distance(e.path[k - 1], e.path[k]);
          if (len == 0.0) continue;
          u = (e.path[k] - e.path[k - 1]) * (1.0 / len);
          if (rest <= len) {
            x = e.path[k - 1] + u * rest;
            break;
          }
          rest -= len;
        }
        row(e.start + h, x, u, -1);
      }
    }
  }
}

void write_trace_csv(std::ostream& out, const RunResult& r) {
  out << "t,v_t,r_t\n";
  for (std::size_t t = 0; t < r.trace.size(); ++t) {
    out << t << ',' << exact(r.trace[t].v) << ',' << exact(r.trace[t].residual) << '\n';
  }
}

std::string render_svg(const RunResult& r) {
  BoundingBox box;
  if (r.config.domain) {
    box = r.config.domain->bounding_box();
  } else if (r.lp) {
    box = r.lp->system().grid.box;
  } else {
    throw PreconditionError("nothing to draw");
  }
  const double mx = 0.05 * box.width();
  const double my = 0.05 * box.height();
  const double vw = box.width() + 2.0 * mx;
  const double vh = box.height() + 2.0 * my;
  const double stroke = 0.004 * std::max(vw, vh);
  const int px_w = 800;
  const int px_h = std::max(1, static_cast<int>(std::lround(800.0 * vh / vw)));

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px_w << "\" height=\"" << px_h << "\" viewBox=\""
    << coord(box.xmin - mx) << ' ' << coord(-(box.ymax + my)) << ' ' << coord(vw) << ' ' << coord(vh) << "\">\n";
  o << "<g transform=\"scale(1,-1)\" fill=\"none\" stroke-width=\"" << coord(stroke) << "\">\n";

  // Domain outline.
  if (r.config.domain) {
    const Domain& d = *r.config.domain;
    if (d.kind() == Domain::Kind::disk) {
      o << "<circle class=\"domain\" cx=\"" << coord(d.offset().x) << "\" cy=\"" << coord(d.offset().y) << "\" r=\""
        << coord(d.radius()) << "\" stroke=\"#000000\"/>\n";
    } else if (d.kind() == Domain::Kind::implicit) {
      o << "<path class=\"domain\" stroke=\"#000000\" d=\"";
      bool first = true;
      for (const auto& [a, b] : d.boundary_segments(128)) {
        if (!first) o << ' ';
        first = false;
        o << 'M' << coord(a.x) << ',' << coord(a.y) << " L" << coord(b.x) << ',' << coord(b.y);
      }
      o << "\"/>\n";
    } else {
      o << "<polygon class=\"domain\" stroke=\"#000000\" points=\"" << points_attr(d.boundary_polygon(), false)
        << "\"/>\n";
    }
  } else {
    o << "<rect class=\"domain\" x=\"" << coord(box.xmin) << "\" y=\"" << coord(box.ymin) << "\" width=\""
      << coord(box.width()) << "\" height=\"" << coord(box.height()) << "\" stroke=\"#000000\"/>\n";
  }

  // Support cells.
  if (r.lp && r.measure && !r.measure->support.empty()) {
    const SpatialGrid& g = r.lp->system().grid;
    double wmax = 0.0;
    for (const double w : r.measure->cell_mass) wmax = std::max(wmax, w);
    o << "<g class=\"support\" fill=\"#1f77b4\" stroke=\"none\">\n";
    for (const std::size_t i : r.measure->support_cells(r.lp->system())) {
      const Vec2 c = g.cells[i];
      o << "<rect x=\"" << coord(c.x - 0.5 * g.hx) << "\" y=\"" << coord(c.y - 0.5 * g.hy) << "\" width=\""
        << coord(g.hx) << "\" height=\"" << coord(g.hy) << "\" fill-opacity=\""
        << coord(r.measure->cell_mass[i] / wmax) << "\"/>\n";
    }
    o << "</g>\n";
  }

  // Steering segments of a schedule, one per distinct pair.
  if (r.schedule) {
    std::map<std::pair<std::size_t, std::size_t>, const ItineraryEntry*> steer;
    for (const ItineraryEntry& e : r.schedule->itinerary) {
      if (e.kind == SegmentKind::steer) steer.emplace(std::make_pair(e.from, e.piece), &e);
    }
    for (const auto& [key, e] : steer) {
      o << "<polyline class=\"steer\" stroke=\"#555555\" stroke-dasharray=\"" << coord(4.0 * stroke) << ' '
        << coord(2.0 * stroke) << "\" points=\"" << points_attr(e->path, false) << "\"/>\n";
    }
  }

  // Extracted pieces.
  const std::size_t n_colors = std::size(kPalette);
  for (std::size_t k = 0; k < r.pieces.size(); ++k) {
    const PeriodicCurve& c = r.pieces[k];
    const char* color = r.schedule ? kPalette[k % n_colors] : kPalette[0];
    if (c.stationary) {
      o << "<circle class=\"piece\" cx=\"" << coord(c.points.front().x) << "\" cy=\"" << coord(c.points.front().y)
        << "\" r=\"" << coord(3.0 * stroke) << "\" fill=\"" << color << "\" stroke=\"none\"/>\n";
    } else {
      o << "<polyline class=\"piece\" stroke=\"" << color << "\" points=\"" << points_attr(c.points, true)
        << "\"/>\n";
    }
  }

  // Oracle boundary.
  if (r.oracle) {
    const std::string dash = coord(3.0 * stroke) + " " + coord(3.0 * stroke);
    if (r.oracle->circle) {
      o << "<circle class=\"oracle\" cx=\"" << coord(r.oracle->center.x) << "\" cy=\"" << coord(r.oracle->center.y)
        << "\" r=\"" << coord(r.oracle->radius) << "\" stroke=\"#2ca02c\" stroke-dasharray=\"" << dash << "\"/>\n";
    } else {
      o << "<polyline class=\"oracle\" stroke=\"#2ca02c\" stroke-dasharray=\"" << dash << "\" points=\""
        << points_attr(r.oracle->polyline, false) << "\"/>\n";
    }
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const InfeasibleError*>(&e)) return 2;
  if (dynamic_cast<const NoConvergenceError*>(&e)) return 3;
  return 1;
}

std::string error_reason(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return err->reason();
  return "internal";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw Error("io", "write failed for '" + path.string() + "'");
}

}  // namespace

int run(const std::string& config_path, const CliOptions& options, std::ostream& out, std::ostream& err) {
  try {
    RunConfig config = load_config(config_path);
    if (options.require_mode && config.mode != *options.require_mode) {
      throw ConfigError("this command needs mode = " + std::string(to_string(*options.require_mode)));
    }
    const std::string svg = options.svg_path.empty() ? config.output_svg : options.svg_path;
    const std::string dir = options.csv_dir.empty() ? config.output_dir : options.csv_dir;
    RunResult r = run_pipeline(config);
    r.summary.set("wall_time", r.wall_time);
    if (!dir.empty()) {
      const std::filesystem::path base(dir);
      write_file(base / "summary.txt", r.summary.text());
      if (r.lp && r.measure) {
        std::ostringstream m;
        write_measure_csv(m, *r.lp, *r.measure);
        write_file(base / "measure.csv", m.str());
      }
      std::ostringstream c;
      write_curve_csv(c, r);
      write_file(base / "curve.csv", c.str());
      std::ostringstream t;
      write_trace_csv(t, r);
      write_file(base / "trace.csv", t.str());
    }
    if (!svg.empty()) write_file(svg, render_svg(r));
    if (!options.quiet) out << r.summary.text();
    return 0;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    err << "error: " << error_reason(e) << ": " << msg << '\n';
    return exit_code(e);
  }
}

}  // namespace occm
