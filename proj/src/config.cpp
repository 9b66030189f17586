#include "occm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "occm/error.hpp"
#include "occm/expr.hpp"

namespace occm {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

class Entries {
 public:
  void add(std::string key, std::string value, std::size_t line) {
    if (map_.contains(key)) throw ConfigError("line " + std::to_string(line) + ": repeated key '" + key + "'");
    map_.emplace(std::move(key), Entry{std::move(value), line});
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    std::string v = std::move(it->second.value);
    map_.erase(it);
    return v;
  }

  std::string required(const std::string& key) {
    auto v = take(key);
    if (!v) throw ConfigError("missing key '" + key + "'");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    auto v = take(key);
    return v ? parse_number(key, *v) : fallback;
  }

  double required_number(const std::string& key) { return parse_number(key, required(key)); }

  std::size_t count(const std::string& key, std::size_t fallback) {
    auto v = take(key);
    if (!v) return fallback;
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
      throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" + *v + "'");
    }
    return out;
  }

  bool flag(const std::string& key, bool fallback) {
    auto v = take(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + *v + "'");
  }

  std::vector<double> numbers(const std::string& key, const std::string& text, char sep = ',') {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (const std::string& part : split(text, sep)) out.push_back(parse_number(key, part));
    return out;
  }

  /// Indices K present under `prefix.K.`.
  std::vector<std::size_t> indices(const std::string& prefix) const {
    std::vector<std::size_t> out;
    for (const auto& [key, entry] : map_) {
      if (key.rfind(prefix + ".", 0) != 0) continue;
      const std::string rest = key.substr(prefix.size() + 1);
      const auto dot = rest.find('.');
      std::size_t k = 0;
      const std::string head = rest.substr(0, dot);
      const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), k);
      if (ec != std::errc{} || ptr != head.data() + head.size()) {
        throw ConfigError("line " + std::to_string(entry.line) + ": '" + key + "' needs a numeric index");
      }
      if (out.empty() || out.back() != k) out.push_back(k);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void expect_empty() const {
    if (map_.empty()) return;
    const auto& [key, entry] = *map_.begin();
    throw ConfigError("line " + std::to_string(entry.line) + ": unknown key '" + key + "'");
  }

 private:
  static double parse_number(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
      throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
    }
    return out;
  }

  struct Entry {
    std::string value;
    std::size_t line;
  };
  std::map<std::string, Entry> map_;
};

std::string checked_expr(const std::string& key, const std::string& text) {
  try {
    Expr::parse(text);
  } catch (const ParseError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
  return text;
}

Sense parse_sense(const std::string& key, const std::string& v) {
  if (v == "min" || v == "minimize") return Sense::minimize;
  if (v == "max" || v == "maximize") return Sense::maximize;
  throw ConfigError("key '" + key + "': expected min or max, got '" + v + "'");
}

Mode parse_mode(const std::string& v) {
  for (const Mode m : {Mode::ratio, Mode::pinned_sweep, Mode::cheeger, Mode::generalized_cheeger, Mode::double_well,
                       Mode::schedule}) {
    if (v == to_string(m)) return m;
  }
  throw ConfigError("key 'mode': unknown mode '" + v + "'");
}

void read_domain(Entries& e, RunConfig& c) {
  c.domain_kind = e.required("domain.kind");
  try {
    if (c.domain_kind == "rectangle") {
      c.domain = Domain::rectangle(e.required_number("domain.width"), e.required_number("domain.height"));
    } else if (c.domain_kind == "disk") {
      c.domain = Domain::disk(e.required_number("domain.radius"));
    } else if (c.domain_kind == "polygon") {
      std::vector<Vec2> vs;
      for (const std::string& pair : split(e.required("domain.vertices"), ';')) {
        const auto xy = e.numbers("domain.vertices", pair);
        if (xy.size() != 2) throw ConfigError("key 'domain.vertices': each vertex needs two coordinates");
        vs.push_back({xy[0], xy[1]});
      }
      c.domain = Domain::convex_polygon(std::move(vs));
    } else if (c.domain_kind == "implicit") {
      const std::string g = checked_expr("domain.expr", e.required("domain.expr"));
      const auto b = e.numbers("domain.box", e.required("domain.box"));
      if (b.size() != 4) throw ConfigError("key 'domain.box': expected xmin,xmax,ymin,ymax");
      c.domain = Domain::implicit(Expr::parse(g), {b[0], b[1], b[2], b[3]});
    } else if (c.domain_kind == "strip") {
      c.strip_half_width = e.required_number("domain.half_width");
      if (!(c.strip_half_width > 0.0)) throw ConfigError("key 'domain.half_width' must be positive");
    } else {
      throw ConfigError("key 'domain.kind': unknown kind '" + c.domain_kind + "'");
    }
  } catch (const DomainError& err) {
    throw ConfigError(std::string("domain: ") + err.what());
  } catch (const PreconditionError& err) {
    throw ConfigError(std::string("domain: ") + err.what());
  }
  if (auto shift = e.take("domain.shift")) {
    const auto d = e.numbers("domain.shift", *shift);
    if (d.size() != 2) throw ConfigError("key 'domain.shift': expected dx,dy");
    if (!c.domain) throw ConfigError("key 'domain.shift' does not apply to strips");
    c.domain = c.domain->translated({d[0], d[1]});
  }
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::ratio:
      return "ratio";
    case Mode::pinned_sweep:
      return "pinned_sweep";
    case Mode::cheeger:
      return "cheeger";
    case Mode::generalized_cheeger:
      return "generalized_cheeger";
    case Mode::double_well:
      return "double_well";
    case Mode::schedule:
      return "schedule";
  }
  return "?";
}

RunConfig parse_config(std::string_view text) {
  Entries e;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const std::string line = trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    e.add(key, trim(std::string_view(line).substr(eq + 1)), line_no);
  }

  RunConfig c;
  c.mode = parse_mode(e.required("mode"));
  if (c.mode == Mode::double_well) {
    c.domain_kind = "strip";
    c.dw_mass = e.required_number("double_well.mass");
    c.dw_half_width = e.number("double_well.half_width", c.dw_half_width);
    if (auto g = e.take("double_well.constraint")) c.dw_constraint = checked_expr("double_well.constraint", *g);
  } else {
    read_domain(e, c);
  }

  c.nx = e.count("grid.nx", c.nx);
  c.ny = e.count("grid.ny", c.nx);
  c.n_u = e.count("grid.n_u", c.n_u);
  if (c.nx < 2 || c.ny < 2) throw ConfigError("grid sizes must be at least 2");
  if (c.n_u < 2) throw ConfigError("grid.n_u must be at least 2");
  c.zero_control = e.flag("grid.zero_control", c.zero_control);
  c.test_degree = static_cast<int>(e.count("test_degree", static_cast<std::size_t>(c.test_degree)));
  if (c.test_degree < 1) throw ConfigError("test_degree must be at least 1");

  if (auto v = e.take("objective.p")) c.p = checked_expr("objective.p", *v);
  if (auto v = e.take("objective.q")) c.q = checked_expr("objective.q", *v);
  if (auto v = e.take("objective.sense")) c.sense = parse_sense("objective.sense", *v);
  if (auto v = e.take("objective.P")) c.P = checked_expr("objective.P", *v);
  if (auto v = e.take("objective.Q")) c.Q = checked_expr("objective.Q", *v);
  c.allow_nonpositive_q = e.flag("objective.allow_nonpositive_q", c.allow_nonpositive_q);

  for (const std::size_t k : e.indices("constraint")) {
    const std::string base = "constraint." + std::to_string(k);
    ConstraintSpec s;
    s.expr = checked_expr(base + ".expr", e.required(base + ".expr"));
    if (auto v = e.take(base + ".sense")) {
      if (*v == "le") {
        s.sense = lp::RowSense::le;
      } else if (*v == "eq") {
        s.sense = lp::RowSense::eq;
      } else {
        throw ConfigError("key '" + base + ".sense': expected le or eq, got '" + *v + "'");
      }
    }
    c.constraints.push_back(std::move(s));
  }
  for (const std::size_t k : e.indices("pin")) {
    const std::string base = "pin." + std::to_string(k);
    PinSpec s;
    s.expr = checked_expr(base + ".expr", e.required(base + ".expr"));
    if (auto v = e.take(base + ".values")) s.values = e.numbers(base + ".values", *v);
    c.pins.push_back(std::move(s));
  }
  if (auto v = e.take("sweep.value")) c.sweep_value = checked_expr("sweep.value", *v);
  if (auto v = e.take("sweep.select")) c.sweep_select = parse_sense("sweep.select", *v);
  c.sweep_points = e.count("sweep.points", c.sweep_points);
  if (c.mode == Mode::pinned_sweep && c.pins.empty()) throw ConfigError("pinned_sweep needs at least one pin");

  c.schedule_rounds = e.count("schedule.rounds", c.schedule_rounds);
  if (auto v = e.take("schedule.cumulative")) {
    if (*v != "none") {
      e.add("schedule.cumulative", *v, 0);
      c.schedule_cumulative = e.count("schedule.cumulative", 0);
      if (*c.schedule_cumulative >= c.constraints.size()) {
        throw ConfigError("key 'schedule.cumulative': no constraint with index " + *v);
      }
    }
  }
  c.schedule_sampled_rounds = e.count("schedule.sampled_rounds", c.schedule_sampled_rounds);
  c.schedule_dt = e.number("schedule.dt", c.schedule_dt);
  if (!(c.schedule_dt > 0.0)) throw ConfigError("schedule.dt must be positive");

  c.tolerance = e.number("solver.tolerance", c.tolerance);
  c.max_iterations = static_cast<int>(e.count("solver.max_iterations", static_cast<std::size_t>(c.max_iterations)));
  c.support_threshold = e.number("solver.support_threshold", c.support_threshold);

  if (auto v = e.take("output.dir")) c.output_dir = *v;
  if (auto v = e.take("output.svg")) c.output_svg = *v;
  c.seed = e.count("seed", 0);
  e.expect_empty();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace occm
