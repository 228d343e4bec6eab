#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "photonlim/io/scenario.hpp"

using namespace photonlim;
namespace sc = photonlim::scenario;
using Catch::Approx;

TEST_CASE("numbers are written with twelve significant digits") {
  CHECK(io::format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(io::format_number(2.0 / 3.0 * 1e-7) == "6.66666666667e-08");
  CHECK(io::format_number(12.5) == "12.5");
  CHECK(io::format_number(-0.0) == "0");
  CHECK(io::format_number(123456789012345.0) == "1.23456789012e+14");
  CHECK(io::format_number(NAN) == "nan");
}

TEST_CASE("CSV round trip keeps twelve digits") {
  io::Table t{{"a", "b"}, {}};
  t.add_row({std::numbers::pi, -2.5e-9});
  t.add_row({NAN, 1.0});
  const auto back = io::parse_csv(io::to_csv(t));
  REQUIRE(back.columns == t.columns);
  CHECK(back.rows[0][0] == Approx(std::numbers::pi).epsilon(1e-12));
  CHECK(back.rows[0][1] == -2.5e-9);
  CHECK(std::isnan(back.rows[1][0]));
  CHECK_THROWS_AS(t.add_row({1.0}), SchemaError);
  CHECK_THROWS_AS(t.column("c"), SchemaError);
}

TEST_CASE("malformed CSV is a schema error") {
  CHECK_THROWS_AS(io::parse_csv(""), SchemaError);
  CHECK_THROWS_AS(io::parse_csv("a,b\n1\n"), SchemaError);
  CHECK_THROWS_AS(io::parse_csv("a\nx\n"), SchemaError);
}

TEST_CASE("line plots are deterministic and carry labels") {
  io::Table t{{"x", "y"}, {}};
  for (int i = 0; i < 5; ++i) t.add_row({double(i), double(i * i)});
  const io::PlotSpec spec{"squares", "", "y value", "", false};
  const auto a = io::line_plot_from_table(t, "x", {"y"}, spec);
  CHECK(a == io::line_plot_from_table(t, "x", {"y"}, spec));
  CHECK(a.find("<polyline") != std::string::npos);
  CHECK(a.find(">squares<") != std::string::npos);
  CHECK(a.find(">y value<") != std::string::npos);
  CHECK(a.find(">x<") != std::string::npos);
  CHECK_THROWS_AS(io::line_plot_from_table(t, "x", {"z"}, spec), SchemaError);
  CHECK_THROWS_AS(io::line_plot_from_table(io::Table{{"x", "y"}, {}}, "x", {"y"}, spec), SchemaError);
}

TEST_CASE("heatmaps need a complete grid") {
  io::Table t{{"x", "y", "z"}, {}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) t.add_row({double(i), double(j), double(i + j)});
  const auto svg = io::heatmap_from_table(t, "x", "y", "z", {});
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 6);
  CHECK(svg.find("#440154") != std::string::npos); // lowest value
  t.rows.pop_back();
  CHECK_THROWS_AS(io::heatmap_from_table(t, "x", "y", "z", {}), SchemaError);
  t.add_row({0.0, 0.0, 1.0});
  CHECK_THROWS_AS(io::heatmap_from_table(t, "x", "y", "z", {}), SchemaError);
}

TEST_CASE("worker pool keeps order and isolates failures") {
  const std::function<int(std::size_t)> job = [](std::size_t i) {
    if (i == 3) throw std::runtime_error("boom");
    return static_cast<int>(i * i);
  };
  for (std::size_t w : {1u, 3u, 8u}) {
    const auto r = io::run_jobs<int>(7, w, job);
    REQUIRE(r.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
      if (i == 3) {
        CHECK_FALSE(r[i].ok());
        CHECK(r[i].error == "boom");
      } else {
        CHECK(*r[i].value == static_cast<int>(i * i));
      }
    }
  }
  CHECK(io::run_jobs<int>(0, 4, job).empty());
}

TEST_CASE("configuration parsing validates keys, kinds and grids") {
  const auto c = sc::parse_config(sc::json::parse(R"({"scenario":"bounds_vs_T","kappa_over_g":[1],
      "T_over_tcrit":{"logspace":[0.1,10,3]},"optimizer":{"N":40,"restarts":2},"seed":5})"));
  CHECK(c.kind == sc::Kind::bounds_vs_T);
  REQUIRE(c.T_over_tcrit.size() == 3);
  CHECK(c.T_over_tcrit[1] == Approx(1.0).epsilon(1e-14));
  CHECK(c.optimizer.positive_count == 40);
  CHECK(c.optimizer.restarts == 2);
  CHECK(c.seed == 5);
  CHECK_NOTHROW(sc::validate(c));
  CHECK_THROWS_AS(sc::parse_config(sc::json::parse(R"({"scenario":"nope"})")), ConfigurationError);
  CHECK_THROWS_AS(sc::parse_config(sc::json::parse(R"({"scenario":"bounds_vs_T","typo":1})")), ConfigurationError);
  CHECK_THROWS_AS(sc::parse_config(sc::json::parse(R"({"scenario":"bounds_vs_T","T":[]})")), ConfigurationError);
  CHECK_THROWS_AS(sc::parse_config(sc::json::parse(R"({"scenario":"metric_optimization","targets":[["P_q"]]})")),
                  UsageError);
  auto bad = sc::preset(sc::Kind::drive_roundtrip);
  bad.chi = {1.5};
  CHECK_THROWS_AS(sc::validate(bad), ConfigurationError);
  auto m = sc::preset(sc::Kind::metric_optimization);
  m.targets = {{"P_k4"}};
  CHECK_THROWS_AS(sc::validate(m), ConfigurationError);
  for (auto k : {sc::Kind::bounds_vs_T, sc::Kind::regime_sweep, sc::Kind::metric_optimization, sc::Kind::zeeman_map,
                 sc::Kind::drive_roundtrip}) {
    CHECK_NOTHROW(sc::validate(sc::preset(k)));
    const auto round = sc::parse_config(sc::config_json(sc::preset(k)));
    CHECK(sc::config_json(round) == sc::config_json(sc::preset(k)));
  }
}

TEST_CASE("generated systems have the requested ratios") {
  const auto p = sc::lambda_system(10.0, 1.0);
  CHECK(p.kappa() == 1.0);
  CHECK(p.channel(0).coupling == Approx(0.1));
  CHECK(cooperativity(p, 0) == Approx(1.0).epsilon(1e-14));
  const auto z = sc::zeeman_system(*sc::preset(sc::Kind::zeeman_map).system, 20.0);
  CHECK(z.channel(1).detuning - z.channel(0).detuning == Approx(20.0));
  const double w = std::pow(z.channel(0).coupling, 2) * z.channel(0).detuning +
                   std::pow(z.channel(1).coupling, 2) * z.channel(1).detuning;
  CHECK(w == Approx(0.0).margin(1e-12));
}

TEST_CASE("shape metrics") {
  const auto t = uniform_grid(0.0, 2.0, 401);
  std::vector<cplx> a;
  for (double x : t) a.push_back(cplx(0.0, 3.0) * std::sin(1.3 * x));
  CHECK(sc::shape_distance(a, t, 1.3) == Approx(0.0).margin(1e-7));
  CHECK(sc::shape_distance(a, t, 2.0) > 0.1);
  std::vector<cplx> b;
  for (double x : t) b.push_back(x * std::exp(-4.0 * x));
  CHECK(sc::peak_flux_time(b, t) == Approx(0.25).margin(0.005));
}

TEST_CASE("analytic bounds scenario writes a consistent bundle") {
  auto c = sc::preset(sc::Kind::bounds_vs_T);
  c.numeric = false;
  c.T_over_tcrit = {0.5, 5.0};
  const auto b1 = sc::run(c, {1, false});
  const auto b4 = sc::run(c, {4, false});
  REQUIRE(b1.files.size() == b4.files.size());
  for (std::size_t i = 0; i < b1.files.size(); ++i) CHECK(b1.files[i] == b4.files[i]);
  const auto t = io::parse_csv(b1.files.front().second);
  REQUIRE(t.rows.size() == 6);
  for (const auto &r : t.rows) {
    CHECK(r[t.column("P_lower")] <= r[t.column("P_upper")]);
    CHECK(std::isnan(r[t.column("P_numeric")]));
  }
  const auto m = sc::manifest(c, {1, false}, b1, "bounds", 0.0);
  CHECK(m["scenario"] == "bounds_vs_T");
  CHECK(m["artifacts"][0].contains("normalization_points"));
  CHECK(m["flagged"] == false);

  const auto dir = std::filesystem::temp_directory_path() / "photonlim_bundle_test";
  std::filesystem::remove_all(dir);
  sc::write_bundle(dir.string(), b1, m);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(io::read_csv((dir / "bounds_vs_T.csv").string()).rows.size() == 6);
  std::filesystem::remove_all(dir);
}

TEST_CASE("failed points are isolated and flagged") {
  auto c = sc::preset(sc::Kind::drive_roundtrip);
  c.kappa_over_g = {1.0};
  c.chi = {0.05};
  c.T_over_tcrit = {2.5};
  const auto ok = sc::run(c, {1, false});
  CHECK_FALSE(ok.flagged);
  CHECK(ok.errors.empty());
  // A non-positive ratio is rejected before any job runs.
  c.kappa_over_g = {-1.0};
  CHECK_THROWS_AS(sc::run(c, {1, false}), ConfigurationError);
}
