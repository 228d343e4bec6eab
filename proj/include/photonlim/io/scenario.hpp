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
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "../analytic_bounds.hpp"
#include "../drive.hpp"
#include "../dynamics.hpp"
#include "../optimizer.hpp"
#include "csv.hpp"
#include "pool.hpp"
#include "svg.hpp"

namespace photonlim::scenario {

using json = nlohmann::json;
inline constexpr const char *kVersion = "0.1.0";

enum class Kind { bounds_vs_T, regime_sweep, metric_optimization, zeeman_map, drive_roundtrip };

inline std::string kind_name(Kind k) {
  switch (k) {
  case Kind::bounds_vs_T: return "bounds_vs_T";
  case Kind::regime_sweep: return "regime_sweep";
  case Kind::metric_optimization: return "metric_optimization";
  case Kind::zeeman_map: return "zeeman_map";
  case Kind::drive_roundtrip: return "drive_roundtrip";
  }
  return "";
}

inline Kind parse_kind(const std::string &s) {
  for (Kind k : {Kind::bounds_vs_T, Kind::regime_sweep, Kind::metric_optimization, Kind::zeeman_map,
                 Kind::drive_roundtrip})
    if (kind_name(k) == s) return k;
  throw ConfigurationError("unknown scenario kind '" + s + "'");
}

struct OptimizerKnobs {
  int positive_count = 0; ///< N; 0 picks the default basis
  double period_factor = 1.25;
  std::size_t normalization_points = 257;
  std::size_t restarts = 1;
  std::size_t max_iterations = 20000;
  int lowpass_cutoff = -1;
};

/// Every scenario's inputs. Rates and times are in units of kappa (kappa = 1
/// for generated Lambda systems) unless a field says otherwise.
struct ScenarioConfig {
  Kind kind = Kind::bounds_vs_T;
  std::optional<SystemParams> system;
  double cooperativity = 1.0;
  std::vector<double> kappa_over_g;
  std::vector<double> T_over_tcrit;
  std::vector<double> T;
  std::vector<double> delta_z;
  std::vector<std::vector<std::string>> targets;
  std::vector<double> chi;
  double theta0 = 0.0;
  bool numeric = true;
  std::size_t trace_points = 201;
  OptimizerKnobs optimizer;
  std::uint64_t seed = 0;
};

/// Lambda system with kappa = 1, the given kappa/g and cooperativity.
inline SystemParams lambda_system(double kappa_over_g, double C) {
  if (!(kappa_over_g > 0.0) || !(C > 0.0)) throw ConfigurationError("kappa/g and C must be positive");
  const double g = 1.0 / kappa_over_g;
  return SystemParams::lambda(1.0, g * g / (2.0 * C), g);
}

/// Two-channel system with channel 2 shifted by delta_z, detunings centred.
inline SystemParams zeeman_system(const SystemParams &base, double delta_z) {
  if (base.channel_count() != 2) throw ConfigurationError("zeeman_map needs a two-channel system");
  auto ch = base.channels();
  ch[0].detuning = 0.0;
  ch[1].detuning = delta_z;
  return centered_detunings(SystemParams(base.kappa(), base.gamma(), std::move(ch)));
}

namespace detail {
inline std::vector<double> number_list(const json &j, const char *what) {
  std::vector<double> out;
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    for (const auto &x : j) {
      if (!x.is_number()) throw ConfigurationError(std::string(what) + " must contain numbers");
      out.push_back(x.get<double>());
    }
  } else if (j.is_object() && (j.contains("logspace") || j.contains("linspace"))) {
    const bool lg = j.contains("logspace");
    const auto &a = lg ? j.at("logspace") : j.at("linspace");
    if (!a.is_array() || a.size() != 3) throw ConfigurationError(std::string(what) + ": range needs [lo, hi, n]");
    const double lo = a[0].get<double>(), hi = a[1].get<double>();
    const auto n = a[2].get<std::size_t>();
    if (n < 1 || (lg && !(lo > 0.0 && hi > 0.0))) throw ConfigurationError(std::string(what) + ": invalid range");
    for (std::size_t i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      out.push_back(lg ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo));
    }
  } else {
    throw ConfigurationError(std::string(what) + " must be a number, a list or a range object");
  }
  if (out.empty()) throw ConfigurationError(std::string(what) + " is empty");
  return out;
}

inline SystemParams parse_system(const json &j) {
  if (!j.is_object()) throw ConfigurationError("system must be an object");
  std::vector<CavityChannel> ch;
  for (const auto &c : j.at("channels"))
    ch.push_back({c.at("g").get<double>(), c.value("detuning", 0.0), c.value("label", std::string())});
  return SystemParams(j.value("kappa", 1.0), j.at("gamma").get<double>(), std::move(ch));
}

inline json system_json(const SystemParams &p) {
  json ch = json::array();
  for (const auto &c : p.channels()) ch.push_back({{"g", c.coupling}, {"detuning", c.detuning}, {"label", c.polarization}});
  return {{"kappa", p.kappa()}, {"gamma", p.gamma()}, {"channels", ch}};
}
} // namespace detail

inline ScenarioConfig parse_config(const json &j) {
  try {
    if (!j.is_object()) throw ConfigurationError("configuration must be a JSON object");
    static const std::vector<std::string> known{"scenario", "system", "cooperativity", "kappa_over_g", "T_over_tcrit",
                                                "T", "delta_z", "targets", "chi", "theta0", "numeric",
                                                "trace_points", "optimizer", "seed"};
    for (auto it = j.begin(); it != j.end(); ++it)
      if (std::find(known.begin(), known.end(), it.key()) == known.end())
        throw ConfigurationError("unknown configuration key '" + it.key() + "'");
    ScenarioConfig c;
    c.kind = parse_kind(j.at("scenario").get<std::string>());
    if (j.contains("system")) c.system = detail::parse_system(j.at("system"));
    c.cooperativity = j.value("cooperativity", 1.0);
    if (j.contains("kappa_over_g")) c.kappa_over_g = detail::number_list(j.at("kappa_over_g"), "kappa_over_g");
    if (j.contains("T_over_tcrit")) c.T_over_tcrit = detail::number_list(j.at("T_over_tcrit"), "T_over_tcrit");
    if (j.contains("T")) c.T = detail::number_list(j.at("T"), "T");
    if (j.contains("delta_z")) c.delta_z = detail::number_list(j.at("delta_z"), "delta_z");
    if (j.contains("chi")) c.chi = detail::number_list(j.at("chi"), "chi");
    if (j.contains("targets")) {
      for (const auto &t : j.at("targets")) {
        std::vector<std::string> names;
        if (t.is_string()) names.push_back(t.get<std::string>());
        else for (const auto &x : t) names.push_back(x.get<std::string>());
        if (names.empty()) throw ConfigurationError("empty target");
        for (const auto &n : names) (void)Probability::parse(n);
        c.targets.push_back(std::move(names));
      }
    }
    c.theta0 = j.value("theta0", 0.0);
    c.numeric = j.value("numeric", true);
    c.trace_points = j.value("trace_points", std::size_t{201});
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("optimizer")) {
      const auto &o = j.at("optimizer");
      c.optimizer.positive_count = o.value("N", 0);
      c.optimizer.period_factor = o.value("period_factor", 1.25);
      c.optimizer.normalization_points = o.value("normalization_points", std::size_t{257});
      c.optimizer.restarts = o.value("restarts", std::size_t{1});
      c.optimizer.max_iterations = o.value("max_iterations", std::size_t{20000});
      c.optimizer.lowpass_cutoff = o.value("lowpass_cutoff", -1);
    }
    return c;
  } catch (const json::exception &e) {
    throw ConfigurationError(std::string("malformed configuration: ") + e.what());
  }
}

/// Checks grids and knobs for the scenario kind.
inline void validate(const ScenarioConfig &c) {
  auto need = [](bool ok, const std::string &msg) {
    if (!ok) throw ConfigurationError(msg);
  };
  auto positive = [&](const std::vector<double> &v, const char *name) {
    for (double x : v) need(x > 0.0 && std::isfinite(x), std::string(name) + " entries must be positive");
  };
  need(c.cooperativity > 0.0, "cooperativity must be positive");
  need(c.optimizer.period_factor >= 1.0, "optimizer.period_factor must be at least 1");
  need(c.optimizer.normalization_points >= 3, "optimizer.normalization_points must be at least 3");
  need(c.optimizer.restarts >= 1, "optimizer.restarts must be at least 1");
  need(c.optimizer.max_iterations >= 1, "optimizer.max_iterations must be at least 1");
  need(c.trace_points >= 4, "trace_points must be at least 4");
  positive(c.kappa_over_g, "kappa_over_g");
  positive(c.T_over_tcrit, "T_over_tcrit");
  positive(c.T, "T");
  switch (c.kind) {
  case Kind::bounds_vs_T:
    need(!c.kappa_over_g.empty() && !c.T_over_tcrit.empty(), "bounds_vs_T needs kappa_over_g and T_over_tcrit");
    break;
  case Kind::regime_sweep:
  case Kind::drive_roundtrip:
    need(!c.kappa_over_g.empty(), kind_name(c.kind) + " needs kappa_over_g");
    need(c.T_over_tcrit.size() == 1, kind_name(c.kind) + " needs a single T_over_tcrit");
    if (c.kind == Kind::drive_roundtrip) {
      need(!c.chi.empty(), "drive_roundtrip needs chi");
      for (double x : c.chi) need(x > 0.0 && x < 1.0, "chi must lie in (0, 1)");
      need(c.theta0 >= 0.0 && c.theta0 < 2.0 * std::numbers::pi, "theta0 must lie in [0, 2 pi)");
    }
    break;
  case Kind::metric_optimization:
    need(c.system.has_value(), "metric_optimization needs a system");
    need(c.T.size() == 1, "metric_optimization needs a single T");
    need(!c.targets.empty(), "metric_optimization needs targets");
    for (const auto &t : c.targets)
      for (const auto &n : t) {
        const auto pr = Probability::parse(n);
        need(!pr.per_channel() || pr.channel < c.system->channel_count(), "target channel out of range: " + n);
      }
    break;
  case Kind::zeeman_map:
    need(c.system.has_value() && c.system->channel_count() == 2, "zeeman_map needs a two-channel system");
    need(!c.T.empty() && !c.delta_z.empty(), "zeeman_map needs T and delta_z grids");
    for (double x : c.delta_z) need(x >= 0.0 && std::isfinite(x), "delta_z entries must be non-negative");
    break;
  }
}

inline json config_json(const ScenarioConfig &c) {
  json j{{"scenario", kind_name(c.kind)}, {"cooperativity", c.cooperativity}, {"numeric", c.numeric},
         {"trace_points", c.trace_points}, {"seed", c.seed}, {"theta0", c.theta0}};
  if (c.system) j["system"] = detail::system_json(*c.system);
  if (!c.kappa_over_g.empty()) j["kappa_over_g"] = c.kappa_over_g;
  if (!c.T_over_tcrit.empty()) j["T_over_tcrit"] = c.T_over_tcrit;
  if (!c.T.empty()) j["T"] = c.T;
  if (!c.delta_z.empty()) j["delta_z"] = c.delta_z;
  if (!c.targets.empty()) j["targets"] = c.targets;
  if (!c.chi.empty()) j["chi"] = c.chi;
  j["optimizer"] = {{"N", c.optimizer.positive_count},
                    {"period_factor", c.optimizer.period_factor},
                    {"normalization_points", c.optimizer.normalization_points},
                    {"restarts", c.optimizer.restarts},
                    {"max_iterations", c.optimizer.max_iterations},
                    {"lowpass_cutoff", c.optimizer.lowpass_cutoff}};
  return j;
}

/// Built-in parameter sets.
inline ScenarioConfig preset(Kind k) {
  ScenarioConfig c;
  c.kind = k;
  switch (k) {
  case Kind::bounds_vs_T:
    c.kappa_over_g = {10.0, 1.0, 0.1};
    c.T_over_tcrit = detail::number_list(json{{"logspace", {0.2, 50.0, 8}}}, "T_over_tcrit");
    break;
  case Kind::regime_sweep:
    c.kappa_over_g = {10.0, 1.0, 0.1};
    c.T_over_tcrit = {2.5};
    break;
  case Kind::metric_optimization:
    c.system = SystemParams(1.0, 0.6,
                            {{std::sqrt(1.0 / 3.0), -5.0, "g1"},
                             {-std::sqrt(4.0 / 15.0), 0.0, "g2"},
                             {std::sqrt(1.0 / 30.0), 5.0, "g3"}});
    c.T = {5.0};
    c.targets = {{"P_k1"}, {"P_k2"}, {"P_k1", "P_k2"}};
    break;
  case Kind::zeeman_map:
    c.system = SystemParams(1.0, 0.6, {{std::sqrt(1.0 / 3.0), 0.0, "g1"}, {-std::sqrt(4.0 / 15.0), 0.0, "g2"}});
    c.T = {1.0, 2.5, 5.0, 7.5, 10.0, 12.5};
    c.delta_z = {0.0, 1.0, 2.0, 5.0, 10.0, 20.0};
    break;
  case Kind::drive_roundtrip:
    c.kappa_over_g = {10.0, 1.0, 0.1};
    c.T_over_tcrit = {2.5};
    c.chi = {0.2, 0.1, 0.05, 0.02};
    break;
  }
  return c;
}

/// Files and manifest fragments produced by one scenario run.
struct Bundle {
  std::vector<std::pair<std::string, std::string>> files; ///< name, contents
  json artifacts = json::array();
  json derived = json::object();
  std::vector<std::string> errors;
  bool flagged = false;

  void add_csv(const std::string &name, const io::Table &t, json meta = json::object()) {
    files.emplace_back(name, io::to_csv(t));
    meta["file"] = name;
    meta["rows"] = t.rows.size();
    meta["columns"] = t.columns;
    artifacts.push_back(std::move(meta));
  }
  void add_svg(const std::string &name, std::string svg) {
    files.emplace_back(name, std::move(svg));
    artifacts.push_back({{"file", name}, {"kind", "svg"}});
  }
  void fail(const std::string &what) {
    errors.push_back(what);
    flagged = true;
  }
};

struct RunOptions {
  std::size_t workers = 1;
  bool strict = false;
};

/// One optimized point with the basis it was solved in.
struct NumericPoint {
  WavepacketSolution solution;
  FourierBasis basis;
  SystemParams params;
  double objective() const { return solution.objective; }
};

inline OptimizerConfig optimizer_config(const OptimizerKnobs &k, std::uint64_t seed) {
  OptimizerConfig cfg;
  cfg.normalization_points = k.normalization_points;
  cfg.restarts = k.restarts;
  cfg.max_iterations = k.max_iterations;
  cfg.lowpass_cutoff = k.lowpass_cutoff;
  cfg.seed = seed;
  return cfg;
}

inline OptimizationTarget make_target(const std::vector<std::string> &names, double T) {
  std::vector<TargetTerm> terms;
  for (const auto &n : names) terms.push_back({Probability::parse(n), T});
  return OptimizationTarget::product(std::move(terms), T);
}

inline NumericPoint solve_point(const SystemParams &p, const OptimizationTarget &target, const OptimizerKnobs &k,
                                std::uint64_t seed) {
  const auto cfg = optimizer_config(k, seed);
  const auto prob = make_problem(p, target, cfg, k.period_factor, k.positive_count);
  return {optimize(prob, cfg), prob.basis(), p};
}

/// Samples of channel j of a solution on n uniform points over [0, T].
inline WavepacketSamples solution_samples(const NumericPoint &pt, std::size_t j, double T, std::size_t n) {
  return synthesize_time_domain({pt.basis, pt.solution.coefficients}, pt.params, j, uniform_grid(0.0, T, n));
}

/// min over phase of ||a/|a| - e^{i phi} b/|b||| for channel-1 samples against
/// A sin(omega t); both sides are normalized on the sample grid.
inline double shape_distance(const std::vector<cplx> &a, const std::vector<double> &t, double omega) {
  double na = 0.0, nb = 0.0;
  cplx ip = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double b = std::sin(omega * t[i]);
    na += std::norm(a[i]);
    nb += b * b;
    ip += std::conj(a[i]) * b;
  }
  if (!(na > 0.0) || !(nb > 0.0)) throw DegenerateVectorError("shape distance of a zero wavepacket");
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::abs(ip) / std::sqrt(na * nb)));
}

/// Time of the largest 2 kappa |alpha|^2 sample.
inline double peak_flux_time(const std::vector<cplx> &a, const std::vector<double> &t) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < a.size(); ++i)
    if (std::norm(a[i]) > std::norm(a[k])) k = i;
  return t[k];
}

/// Emission after instantaneous excitation, simulated up to T.
inline double instant_emission(const SystemParams &p, double T) {
  double rate = std::max(p.kappa(), p.gamma());
  for (const auto &c : p.channels()) rate = std::max(rate, std::abs(c.coupling));
  const auto n = static_cast<std::size_t>(std::ceil(T * rate / 0.02)) + 1;
  const auto tr = instant_excitation(p, uniform_grid(0.0, T, std::max<std::size_t>(n, 101)));
  return tr.emitted(tr.times.size() - 1);
}

namespace detail {
inline std::string indexed(const std::string &stem, std::size_t i, const std::string &ext) {
  return stem + "_" + std::to_string(i) + ext;
}

inline json point_meta(const NumericPoint &pt, const OptimizerKnobs &k) {
  return {{"N", pt.basis.positive_count()},
          {"T_b", pt.basis.period()},
          {"normalization_points", k.normalization_points},
          {"restarts", k.restarts},
          {"converged", pt.solution.converged}};
}

inline double flag_value(bool b) { return b ? 1.0 : 0.0; }
} // namespace detail

inline Bundle run_bounds_vs_T(const ScenarioConfig &c, const RunOptions &o) {
  struct Row {
    std::vector<double> values;
    bool converged = true;
  };
  const std::size_t nr = c.kappa_over_g.size(), nt = c.T_over_tcrit.size();
  const std::function<Row(std::size_t)> job = [&](std::size_t idx) {
    const double r = c.kappa_over_g[idx / nt], x = c.T_over_tcrit[idx % nt];
    const auto p = lambda_system(r, c.cooperativity);
    const double T = x * critical_time(p);
    const auto b = lower_bound(p, T, 10001, o.strict);
    Row row;
    double numeric = NAN, conv = NAN, N = NAN, Tb = NAN;
    if (c.numeric) {
      const auto pt = solve_point(p, make_target({"P_k1"}, T), c.optimizer, c.seed + idx);
      numeric = pt.objective();
      conv = detail::flag_value(pt.solution.converged);
      row.converged = pt.solution.converged;
      N = static_cast<double>(pt.basis.positive_count());
      Tb = pt.basis.period();
    }
    row.values = {r, T, x, b.p_upper, b.p_lower, numeric, instant_emission(p, T), adiabatic_limit(p),
                  b.omega_m, conv, N, Tb};
    return row;
  };
  const auto res = io::run_jobs<Row>(nr * nt, o.workers, job);
  Bundle out;
  io::Table t{{"kappa_over_g", "T", "T_over_tcrit", "P_upper", "P_lower", "P_numeric", "P_instant", "P_adiabatic",
               "omega_m", "converged", "N", "T_b"},
              {}};
  bool all_converged = true;
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (!res[i].ok()) {
      out.fail("point " + std::to_string(i) + ": " + res[i].error);
      std::vector<double> row(t.columns.size(), NAN);
      row[0] = c.kappa_over_g[i / nt];
      row[2] = c.T_over_tcrit[i % nt];
      t.add_row(row);
      continue;
    }
    if (!res[i].value->converged) all_converged = false;
    t.add_row(res[i].value->values);
  }
  if (!all_converged) out.flagged = true;
  out.add_csv("bounds_vs_T.csv", t,
              {{"normalization_points", c.optimizer.normalization_points},
               {"restarts", c.optimizer.restarts},
               {"converged", all_converged},
               {"per_row", "N, T_b and converged are per-row columns"}});
  for (std::size_t ri = 0; ri < nr; ++ri) {
    std::vector<io::LineSeries> s(c.numeric ? 4 : 3);
    s[0].name = "P_upper";
    s[1].name = "P_lower";
    s[2].name = "P_instant";
    if (c.numeric) s[3].name = "P_numeric";
    for (std::size_t k = 0; k < nt; ++k) {
      const auto &row = t.rows[ri * nt + k];
      const std::size_t cols[] = {3, 4, 6, 5};
      for (std::size_t q = 0; q < s.size(); ++q) {
        s[q].x.push_back(row[2]);
        s[q].y.push_back(row[cols[q]]);
      }
    }
    io::PlotSpec spec{"kappa/g = " + io::format_number(c.kappa_over_g[ri]), "T / t_crit", "extraction probability", "",
                      true};
    try {
      out.add_svg(detail::indexed("bounds_vs_T", ri, ".svg"), io::render_line_plot(spec, s));
    } catch (const SchemaError &e) {
      out.fail(std::string("plot: ") + e.what());
    }
  }
  return out;
}

inline Bundle run_regime_sweep(const ScenarioConfig &c, const RunOptions &o) {
  const double x = c.T_over_tcrit.front();
  const std::function<NumericPoint(std::size_t)> job = [&](std::size_t i) {
    const auto p = lambda_system(c.kappa_over_g[i], c.cooperativity);
    const double T = x * critical_time(p);
    return solve_point(p, make_target({"P_k1"}, T), c.optimizer, c.seed + i);
  };
  const auto res = io::run_jobs<NumericPoint>(c.kappa_over_g.size(), o.workers, job);
  Bundle out;
  io::Table summary{{"kappa_over_g", "T", "P_numeric", "P_lower", "P_upper", "shape_distance", "peak_flux_time_over_T",
                     "converged", "N", "T_b"},
                    {}};
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto p = lambda_system(c.kappa_over_g[i], c.cooperativity);
    const double T = x * critical_time(p);
    if (!res[i].ok()) {
      out.fail("kappa/g " + io::format_number(c.kappa_over_g[i]) + ": " + res[i].error);
      summary.add_row({c.kappa_over_g[i], T, NAN, NAN, NAN, NAN, NAN, NAN, NAN, NAN});
      continue;
    }
    const auto &pt = *res[i].value;
    const auto b = lower_bound(p, T, 10001, o.strict);
    const auto s = solution_samples(pt, 0, T, c.trace_points);
    io::Table wp{{"t", "alpha_re", "alpha_im", "flux", "bound_upper"}, {}};
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      const cplx a = s.derivative[0][k];
      wp.add_row({s.times[k], a.real(), a.imag(), 2.0 * p.kappa() * std::norm(a),
                  bound_wavepacket(b, s.times[k], BoundKind::upper)});
    }
    auto meta = detail::point_meta(pt, c.optimizer);
    meta["kappa_over_g"] = c.kappa_over_g[i];
    out.add_csv(detail::indexed("wavepacket", i, ".csv"), wp, meta);
    if (!pt.solution.converged) out.flagged = true;
    summary.add_row({c.kappa_over_g[i], T, pt.objective(), b.p_lower, b.p_upper,
                     shape_distance(s.derivative[0], s.times, b.omega_m),
                     peak_flux_time(s.derivative[0], s.times) / T, detail::flag_value(pt.solution.converged),
                     static_cast<double>(pt.basis.positive_count()), pt.basis.period()});
    io::PlotSpec spec{"kappa/g = " + io::format_number(c.kappa_over_g[i]), "t", "flux", "", false};
    out.add_svg(detail::indexed("wavepacket", i, ".svg"),
                io::line_plot_from_table(wp, "t", {"flux"}, spec));
  }
  out.add_csv("regime_sweep.csv", summary,
              {{"normalization_points", c.optimizer.normalization_points}, {"restarts", c.optimizer.restarts}});
  return out;
}

inline Bundle run_metric_optimization(const ScenarioConfig &c, const RunOptions &o) {
  const SystemParams &p = *c.system;
  const double T = c.T.front();
  const std::size_t K = c.targets.size();
  const std::function<NumericPoint(std::size_t)> job = [&](std::size_t i) {
    return solve_point(p, make_target(c.targets[i], T), c.optimizer, c.seed + i);
  };
  const auto res = io::run_jobs<NumericPoint>(K, o.workers, job);
  Bundle out;
  std::vector<std::string> cols{"target", "objective", "t_max", "converged", "iterations"};
  for (std::size_t k = 0; k < K; ++k) cols.push_back("V_target_" + std::to_string(k));
  for (std::size_t j = 0; j < p.channel_count(); ++j) cols.push_back("P_k" + std::to_string(j + 1));
  io::Table summary{cols, {}};
  std::vector<std::optional<OptimizationProblem>> problems(K);
  const auto cfg = optimizer_config(c.optimizer, c.seed);
  json names = json::array();
  for (std::size_t k = 0; k < K; ++k) {
    problems[k].emplace(make_problem(p, make_target(c.targets[k], T), cfg, c.optimizer.period_factor,
                                     c.optimizer.positive_count));
    names.push_back(problems[k]->target().describe());
  }
  out.derived["targets"] = names;
  for (std::size_t i = 0; i < K; ++i) {
    if (!res[i].ok()) {
      out.fail("target " + std::to_string(i) + ": " + res[i].error);
      std::vector<double> row(cols.size(), NAN);
      row[0] = static_cast<double>(i);
      summary.add_row(row);
      continue;
    }
    const auto &pt = *res[i].value;
    const auto &sol = pt.solution;
    if (!sol.converged) out.flagged = true;
    std::vector<double> row{static_cast<double>(i), sol.objective, sol.t_max, detail::flag_value(sol.converged),
                            static_cast<double>(sol.iterations)};
    for (std::size_t k = 0; k < K; ++k) row.push_back(evaluate_product(*problems[k], sol.v));
    for (std::size_t j = 0; j < p.channel_count(); ++j)
      row.push_back(normalized_probability(*problems[i], sol.v, Probability::emission(j), T, sol.t_max));
    summary.add_row(row);

    auto meta = detail::point_meta(pt, c.optimizer);
    meta["target"] = names[i];
    io::Table traces{{"t"}, {}};
    for (const auto &n : sol.traces.names) traces.columns.push_back(n);
    for (std::size_t k = 0; k < sol.traces.times.size(); ++k) {
      std::vector<double> r{sol.traces.times[k]};
      for (const auto &v : sol.traces.values) r.push_back(v[k]);
      traces.add_row(r);
    }
    out.add_csv(detail::indexed("traces", i, ".csv"), traces, meta);
    io::Table wp{{"t"}, {}};
    std::vector<WavepacketSamples> ch;
    std::vector<std::string> flux_cols;
    for (std::size_t j = 0; j < p.channel_count(); ++j) {
      const std::string s = std::to_string(j + 1);
      wp.columns.insert(wp.columns.end(), {"alpha" + s + "_re", "alpha" + s + "_im", "flux" + s});
      flux_cols.push_back("flux" + s);
      ch.push_back(solution_samples(pt, j, T, c.trace_points));
    }
    for (std::size_t k = 0; k < c.trace_points; ++k) {
      std::vector<double> r{ch[0].times[k]};
      for (const auto &s : ch) {
        const cplx a = s.derivative[0][k];
        r.insert(r.end(), {a.real(), a.imag(), 2.0 * p.kappa() * std::norm(a)});
      }
      wp.add_row(r);
    }
    out.add_csv(detail::indexed("wavepacket", i, ".csv"), wp, meta);
    io::Table hist{{"iteration", "objective", "t_max"}, {}};
    for (const auto &h : sol.history) hist.add_row({static_cast<double>(h.iteration), h.objective, h.t_max});
    out.add_csv(detail::indexed("history", i, ".csv"), hist, meta);
    const std::string title = names[i].get<std::string>();
    out.add_svg(detail::indexed("wavepacket", i, ".svg"),
                io::line_plot_from_table(wp, "t", flux_cols, {title, "t", "flux", "", false}));
    std::vector<std::string> trace_cols(sol.traces.names.begin(), sol.traces.names.end());
    out.add_svg(detail::indexed("traces", i, ".svg"),
                io::line_plot_from_table(traces, "t", trace_cols, {title, "t", "normalized probability", "", false}));
  }
  out.add_csv("metric_optimization.csv", summary,
              {{"normalization_points", c.optimizer.normalization_points}, {"restarts", c.optimizer.restarts}});
  return out;
}

inline Bundle run_zeeman_map(const ScenarioConfig &c, const RunOptions &o) {
  const std::size_t nt = c.T.size(), nz = c.delta_z.size();
  const std::function<NumericPoint(std::size_t)> job = [&](std::size_t idx) {
    const auto p = zeeman_system(*c.system, c.delta_z[idx % nz]);
    return solve_point(p, make_target({"P_k1", "P_k2"}, c.T[idx / nz]), c.optimizer, c.seed + idx);
  };
  const auto res = io::run_jobs<NumericPoint>(nt * nz, o.workers, job);
  Bundle out;
  io::Table t{{"T", "delta_z", "P_product", "P_k1", "P_k2", "converged", "N", "T_b"}, {}};
  bool all_converged = true;
  for (std::size_t idx = 0; idx < res.size(); ++idx) {
    const double T = c.T[idx / nz], dz = c.delta_z[idx % nz];
    if (!res[idx].ok()) {
      out.fail("T " + io::format_number(T) + ", delta_z " + io::format_number(dz) + ": " + res[idx].error);
      t.add_row({T, dz, NAN, NAN, NAN, NAN, NAN, NAN});
      continue;
    }
    const auto &pt = *res[idx].value;
    all_converged = all_converged && pt.solution.converged;
    const auto &tv = pt.solution.term_values.front();
    t.add_row({T, dz, pt.objective(), tv[0], tv[1], detail::flag_value(pt.solution.converged),
               static_cast<double>(pt.basis.positive_count()), pt.basis.period()});
  }
  if (!all_converged) out.flagged = true;
  out.derived["product_limit_degenerate"] = product_limit_degenerate(*c.system);
  out.derived["product_limit_decoupled"] = product_limit_decoupled(*c.system);
  out.add_csv("zeeman_map.csv", t,
              {{"normalization_points", c.optimizer.normalization_points},
               {"restarts", c.optimizer.restarts},
               {"converged", all_converged},
               {"per_row", "N, T_b and converged are per-row columns"}});
  try {
    out.add_svg("zeeman_map.svg", io::heatmap_from_table(t, "delta_z", "T", "P_product",
                                                         {"optimized P_k1 P_k2", "delta_Z / kappa", "T kappa",
                                                          "P_k1 P_k2", false}));
  } catch (const SchemaError &e) {
    out.fail(std::string("plot: ") + e.what());
  }
  return out;
}

inline Bundle run_drive_roundtrip(const ScenarioConfig &c, const RunOptions &o) {
  struct Point {
    DrivePulse pulse;
    DriveResidual residual;
    double expected = 0.0;
  };
  const std::size_t nr = c.kappa_over_g.size(), nc = c.chi.size();
  const double x = c.T_over_tcrit.front();
  const std::function<Point(std::size_t)> job = [&](std::size_t idx) {
    const auto p = lambda_system(c.kappa_over_g[idx / nc], c.cooperativity);
    const double T = x * critical_time(p);
    const auto b = lower_bound(p, T, 10001, o.strict);
    const SineWavepacket wp(b.amplitude_lower(), b.omega_m);
    DriveContext ctx;
    ctx.chi = c.chi[idx % nc];
    ctx.theta0 = c.theta0;
    const auto grid = uniform_grid(0.0, T, 2001);
    Point pt;
    pt.pulse = reconstruct_drive(wp, p, ctx, grid);
    pt.residual = verify_drive(pt.pulse, p, ctx, wp, grid);
    pt.expected = b.p_lower * (1.0 - ctx.chi) * (1.0 - ctx.chi);
    return pt;
  };
  const auto res = io::run_jobs<Point>(nr * nc, o.workers, job);
  Bundle out;
  io::Table t{{"kappa_over_g", "chi", "max_abs_omega", "imag_ratio", "dynamic_l2", "algebraic", "emission",
               "expected_emission"},
              {}};
  for (std::size_t idx = 0; idx < res.size(); ++idx) {
    const double r = c.kappa_over_g[idx / nc], chi = c.chi[idx % nc];
    if (!res[idx].ok()) {
      out.fail("kappa/g " + io::format_number(r) + ", chi " + io::format_number(chi) + ": " + res[idx].error);
      t.add_row({r, chi, NAN, NAN, NAN, NAN, NAN, NAN});
      continue;
    }
    const auto &pt = *res[idx].value;
    const double m = pt.pulse.max_abs();
    if (pt.residual.dynamic_l2 > 1e-2) out.flagged = true;
    t.add_row({r, chi, m, m > 0.0 ? pt.pulse.max_abs_imag() / m : 0.0, pt.residual.dynamic_l2,
               pt.residual.algebraic, pt.residual.simulated_emission, pt.expected});
    io::Table pulse{{"t", "omega_re", "omega_im"}, {}};
    for (std::size_t k = 0; k < pt.pulse.times.size(); ++k)
      pulse.add_row({pt.pulse.times[k], pt.pulse.omega[k].real(), pt.pulse.omega[k].imag()});
    out.add_csv(detail::indexed("pulse", idx, ".csv"), pulse,
                {{"kappa_over_g", r}, {"chi", chi}, {"theta0", c.theta0}});
  }
  for (std::size_t ri = 0; ri < nr; ++ri) {
    std::vector<io::LineSeries> s;
    for (std::size_t ci = 0; ci < nc; ++ci) {
      const auto &rj = res[ri * nc + ci];
      if (!rj.ok()) continue;
      io::LineSeries l{"chi = " + io::format_number(c.chi[ci]), rj.value->pulse.times, {}};
      for (const auto &w : rj.value->pulse.omega) l.y.push_back(w.real());
      s.push_back(std::move(l));
    }
    if (!s.empty())
      out.add_svg(detail::indexed("pulse", ri, ".svg"),
                  io::render_line_plot({"kappa/g = " + io::format_number(c.kappa_over_g[ri]), "t", "Re Omega", "", false},
                                       s));
  }
  out.add_csv("drive_summary.csv", t);
  return out;
}

inline Bundle run(const ScenarioConfig &c, const RunOptions &o) {
  validate(c);
  switch (c.kind) {
  case Kind::bounds_vs_T: return run_bounds_vs_T(c, o);
  case Kind::regime_sweep: return run_regime_sweep(c, o);
  case Kind::metric_optimization: return run_metric_optimization(c, o);
  case Kind::zeeman_map: return run_zeeman_map(c, o);
  case Kind::drive_roundtrip: return run_drive_roundtrip(c, o);
  }
  throw UsageError("unhandled scenario kind");
}

inline json manifest(const ScenarioConfig &c, const RunOptions &o, const Bundle &b, const std::string &verb,
                     double elapsed_seconds) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"tool", "photonlim"},
          {"version", kVersion},
          {"verb", verb},
          {"scenario", kind_name(c.kind)},
          {"seed", c.seed},
          {"strict", o.strict},
          {"config", config_json(c)},
          {"derived", b.derived},
          {"artifacts", b.artifacts},
          {"flagged", b.flagged},
          {"errors", b.errors},
          {"libraries", {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                       std::to_string(EIGEN_MINOR_VERSION)},
                         {"boost", BOOST_LIB_VERSION}}},
          {"metadata", {{"timestamp", stamp}, {"elapsed_seconds", elapsed_seconds}, {"workers", o.workers}}}};
}

/// Writes every file of the bundle plus manifest.json into dir.
inline void write_bundle(const std::string &dir, const Bundle &b, const json &manifest_json) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  for (const auto &[name, text] : b.files) io::write_text((std::filesystem::path(dir) / name).string(), text);
  io::write_text((std::filesystem::path(dir) / "manifest.json").string(), manifest_json.dump(2) + "\n");
}

} // namespace photonlim::scenario
