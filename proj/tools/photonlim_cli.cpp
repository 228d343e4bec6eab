/* Copyright 2026 The photonlim Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
// Command-line front end: one verb per scenario kind plus CSV plotting.
//
// Exit codes: 0 clean, 1 usage/configuration/I-O error, 2 finished with
// flagged results (failed points, non-converged optimizations or failed
// drive round trips).

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "photonlim/io/scenario.hpp"

namespace sc = photonlim::scenario;
namespace io = photonlim::io;

namespace {

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  bool strict = false;
};

void add_common(CLI::App *cmd, CommonOptions &o) {
  cmd->add_option("--config", o.config, "JSON scenario file (defaults to the built-in preset)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "random seed, overrides the configuration");
  cmd->add_option("--workers", o.workers, "parallel jobs")->check(CLI::PositiveNumber);
  cmd->add_flag("--strict", o.strict, "treat accuracy warnings as errors");
}

sc::ScenarioConfig load(const CommonOptions &o, sc::Kind fallback, const std::vector<sc::Kind> &allowed) {
  sc::ScenarioConfig c = sc::preset(fallback);
  if (!o.config.empty()) {
    std::ifstream f(o.config);
    if (!f) throw photonlim::IoError("cannot open configuration '" + o.config + "'");
    sc::json j;
    try {
      j = sc::json::parse(f);
    } catch (const sc::json::exception &e) {
      throw photonlim::ConfigurationError(std::string("configuration is not valid JSON: ") + e.what());
    }
    c = sc::parse_config(j);
  }
  if (std::find(allowed.begin(), allowed.end(), c.kind) == allowed.end())
    throw photonlim::UsageError("scenario '" + sc::kind_name(c.kind) + "' does not belong to this verb");
  if (o.seed) c.seed = *o.seed;
  return c;
}

int execute(const std::string &verb, sc::ScenarioConfig c, const CommonOptions &o) {
  const sc::RunOptions ro{o.workers, o.strict};
  const std::string dir = o.out.empty() ? "out/" + verb : o.out;
  const auto t0 = std::chrono::steady_clock::now();
  const auto bundle = sc::run(c, ro);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  sc::write_bundle(dir, bundle, sc::manifest(c, ro, bundle, verb, secs));
  for (const auto &e : bundle.errors) std::cerr << "error: " << e << "\n";
  std::cout << verb << ": wrote " << bundle.files.size() + 1 << " files to " << dir
            << (bundle.flagged ? " (flagged, see manifest.json)" : "") << "\n";
  return bundle.flagged ? 2 : 0;
}

struct PlotOptions {
  std::string csv, out, x, z, title, x_label, y_label;
  std::vector<std::string> y;
  bool log_x = false;
};

int plot(const PlotOptions &p) {
  const auto table = io::read_csv(p.csv);
  const io::PlotSpec spec{p.title, p.x_label, p.y_label, p.z.empty() ? "" : p.z, p.log_x};
  std::string svg;
  if (!p.z.empty()) {
    if (p.y.size() != 1) throw photonlim::UsageError("a heatmap needs exactly one --y column");
    svg = io::heatmap_from_table(table, p.x, p.y.front(), p.z, spec);
  } else {
    svg = io::line_plot_from_table(table, p.x, p.y, spec);
  }
  const std::string out = p.out.empty() ? p.csv.substr(0, p.csv.rfind('.')) + ".svg" : p.out;
  io::write_text(out, svg);
  std::cout << "plot: wrote " << out << "\n";
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Extraction bounds, wavepacket optimization and drive reconstruction for cavity photon sources"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sc::kVersion);

  CommonOptions bounds_o, opt_o, sweep_o, zee_o, drive_o;
  auto *bounds = app.add_subcommand("bounds", "analytic upper/lower bounds and instant excitation versus T");
  add_common(bounds, bounds_o);
  auto *optimize = app.add_subcommand("optimize", "optimize target probabilities for one multi-channel system");
  add_common(optimize, opt_o);
  auto *sweep = app.add_subcommand("sweep", "numeric optimization over (kappa/g, T) or regime wavepackets");
  add_common(sweep, sweep_o);
  auto *zeeman = app.add_subcommand("zeeman-map", "optimized P_k1 P_k2 over (T, Delta_Z)");
  add_common(zeeman, zee_o);
  auto *drive = app.add_subcommand("drive-check", "reconstruct drives for bound wavepackets and simulate them");
  add_common(drive, drive_o);

  PlotOptions plot_o;
  auto *plt = app.add_subcommand("plot", "render a CSV as an SVG line plot or heatmap");
  plt->add_option("--csv", plot_o.csv, "input CSV")->required();
  plt->add_option("--x", plot_o.x, "x column")->required();
  plt->add_option("--y", plot_o.y, "y column(s)")->required();
  plt->add_option("--z", plot_o.z, "value column; switches to a heatmap");
  plt->add_option("--out", plot_o.out, "output SVG (defaults next to the CSV)");
  plt->add_option("--title", plot_o.title);
  plt->add_option("--x-label", plot_o.x_label);
  plt->add_option("--y-label", plot_o.y_label);
  plt->add_flag("--log-x", plot_o.log_x);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*bounds) {
      auto c = load(bounds_o, sc::Kind::bounds_vs_T, {sc::Kind::bounds_vs_T});
      if (bounds_o.config.empty())
        c.T_over_tcrit = sc::detail::number_list(sc::json{{"logspace", {0.2, 50.0, 41}}}, "T_over_tcrit");
      c.numeric = false;
      return execute("bounds", c, bounds_o);
    }
    if (*optimize)
      return execute("optimize", load(opt_o, sc::Kind::metric_optimization, {sc::Kind::metric_optimization}), opt_o);
    if (*sweep)
      return execute("sweep", load(sweep_o, sc::Kind::bounds_vs_T, {sc::Kind::bounds_vs_T, sc::Kind::regime_sweep}),
                     sweep_o);
    if (*zeeman) return execute("zeeman-map", load(zee_o, sc::Kind::zeeman_map, {sc::Kind::zeeman_map}), zee_o);
    if (*drive)
      return execute("drive-check", load(drive_o, sc::Kind::drive_roundtrip, {sc::Kind::drive_roundtrip}), drive_o);
    if (*plt) return plot(plot_o);
  } catch (const photonlim::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
