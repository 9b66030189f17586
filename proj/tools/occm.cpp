#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "occm/error.hpp"
#include "occm/oracles.hpp"
#include "occm/pipeline.hpp"

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

occm::Domain polygon_from(const std::string& text) {
  std::vector<occm::Vec2> vs;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(';', start);
    const std::string pair = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    const auto comma = pair.find(',');
    if (comma == std::string::npos) throw occm::ConfigError("polygon vertex '" + pair + "' needs x,y");
    try {
      vs.push_back({std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1))});
    } catch (const std::logic_error&) {
      throw occm::ConfigError("polygon vertex '" + pair + "' is not numeric");
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return occm::Domain::convex_polygon(std::move(vs));
}

int print_oracle(const std::string& kind, const std::vector<std::string>& args, bool quiet) {
  try {
    auto arg = [&](std::size_t k) {
      if (k >= args.size()) throw occm::ConfigError("oracle " + kind + " needs more arguments");
      try {
        return std::stod(args[k]);
      } catch (const std::logic_error&) {
        throw occm::ConfigError("argument '" + args[k] + "' is not a number");
      }
    };
    std::string out;
    if (kind == "double_well") {
      const occm::DoubleWellOracle o = occm::double_well_oracle(arg(0));
      out = "v_star: " + num(o.v_star) + "\nlambda: " + num(o.lambda) + "\n";
    } else {
      occm::Domain d = occm::Domain::disk(1.0);
      if (kind == "rectangle") {
        d = occm::Domain::rectangle(arg(0), arg(1));
      } else if (kind == "disk") {
        d = occm::Domain::disk(arg(0));
      } else if (kind == "polygon") {
        if (args.empty()) throw occm::ConfigError("oracle polygon needs \"x,y; x,y; ...\"");
        d = polygon_from(args[0]);
      } else {
        throw occm::ConfigError("unknown oracle domain '" + kind + "'");
      }
      const occm::CheegerOracle o = occm::cheeger_constant(d);
      out = "v_star: " + num(o.v_star) + "\nr_star: " + num(o.r_star) + "\nh_star: " + num(o.h_star) + "\n";
    }
    if (!quiet) std::cout << out;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << occm::error_reason(e) << ": " << e.what() << '\n';
    return occm::exit_code(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal values, periodic curves and schedules from occupational-measure LPs"};
  app.require_subcommand(1);
  occm::CliOptions options;
  std::string config;
  app.add_option("--emit-svg", options.svg_path, "write the SVG overlay here");
  app.add_option("--emit-csv", options.csv_dir, "write summary, measure, curve and trace files into this directory");
  app.add_flag("--quiet", options.quiet, "do not print the summary");

  auto* solve = app.add_subcommand("solve", "run the mode named in the config");
  solve->add_option("config", config, "config file")->required();
  auto* schedule = app.add_subcommand("schedule", "run a schedule-mode config");
  schedule->add_option("config", config, "config file")->required();
  auto* sweep = app.add_subcommand("sweep", "run a pinned_sweep config");
  sweep->add_option("config", config, "config file")->required();

  std::string oracle_kind;
  std::vector<std::string> oracle_args;
  auto* oracle = app.add_subcommand("oracle", "analytic values: rectangle W H | disk R | polygon \"x,y; ...\" | double_well M");
  oracle->add_option("kind", oracle_kind, "rectangle, disk, polygon or double_well")->required();
  oracle->add_option("args", oracle_args, "domain parameters");

  for (auto* sub : {solve, schedule, sweep, oracle}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: usage: " << e.what() << '\n';
    return 1;
  }

  if (oracle->parsed()) return print_oracle(oracle_kind, oracle_args, options.quiet);
  if (schedule->parsed()) options.require_mode = occm::Mode::schedule;
  if (sweep->parsed()) options.require_mode = occm::Mode::pinned_sweep;
  return occm::run(config, options, std::cout, std::cerr);
}
