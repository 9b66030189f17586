#pragma once

// Run configuration: a flat text file of `key = value` lines with dotted
// keys. Blank lines and lines starting with '#' are ignored.
//
//   mode                  ratio | pinned_sweep | cheeger | generalized_cheeger | double_well | schedule
//   domain.kind           rectangle | disk | polygon | implicit | strip
//   domain.width/height   rectangle
//   domain.radius         disk
//   domain.vertices       polygon, "x,y; x,y; ..." counterclockwise
//   domain.expr/box       implicit region g <= 0 inside "xmin,xmax,ymin,ymax"
//   domain.half_width     strip (one-dimensional systems, controls +e1, -e1, 0)
//   domain.shift          "dx,dy" translation
//   grid.nx/ny/n_u        lattice intervals per axis and control directions
//   grid.zero_control     add the resting control
//   test_degree           N
//   objective.p/q/sense   ratio integrands, min | max
//   objective.P/Q         generalized Cheeger weights
//   objective.allow_nonpositive_q
//   constraint.K.expr/sense          averaged constraints, le | eq
//   pin.K.expr/values                pinned averages, values "a,b,..." (empty: default lattice)
//   sweep.value/select/points        V over x1, x2 (pinned values), u1 (mu(p)), u2 (mu(q))
//   double_well.mass/half_width/constraint
//   schedule.rounds/cumulative/sampled_rounds/dt
//   solver.tolerance/max_iterations/support_threshold
//   output.dir/svg        artifact destinations
//   seed                  recorded only

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "occm/domain.hpp"
#include "occm/lp.hpp"
#include "occm/measure.hpp"

namespace occm {

enum class Mode : std::uint8_t { ratio, pinned_sweep, cheeger, generalized_cheeger, double_well, schedule };

std::string_view to_string(Mode m);

struct ConstraintSpec {
  std::string expr;
  lp::RowSense sense = lp::RowSense::le;
};

struct PinSpec {
  std::string expr;
  std::vector<double> values;
};

struct RunConfig {
  Mode mode = Mode::ratio;

  std::string domain_kind;  // as written
  std::optional<Domain> domain;  // absent for strips and double-well runs
  double strip_half_width = 1.0;

  std::size_t nx = 48;
  std::size_t ny = 48;
  std::size_t n_u = 32;
  bool zero_control = false;
  int test_degree = 8;

  std::string p = "0";
  std::string q = "1";
  Sense sense = Sense::minimize;
  std::string P = "1";
  std::string Q = "1";
  bool allow_nonpositive_q = false;
  std::vector<ConstraintSpec> constraints;

  std::vector<PinSpec> pins;
  std::string sweep_value = "u1/u2";
  Sense sweep_select = Sense::minimize;
  std::size_t sweep_points = 41;

  double dw_mass = 0.0;
  double dw_half_width = 1.5;
  std::string dw_constraint = "x1";

  std::size_t schedule_rounds = 1000;
  std::optional<std::size_t> schedule_cumulative;  // constraint index
  std::size_t schedule_sampled_rounds = 50;
  double schedule_dt = 0.01;

  double tolerance = 1e-9;
  int max_iterations = 50;
  double support_threshold = 1e-7;

  std::string output_dir;
  std::string output_svg;
  std::uint64_t seed = 0;
};

/// Throws ConfigError naming the line or key on malformed input, unknown or
/// repeated keys, bad values, missing required keys and grid sizes below 2.
RunConfig parse_config(std::string_view text);

/// Reads and parses a file; unreadable files raise ConfigError.
RunConfig load_config(const std::string& path);

}  // namespace occm
