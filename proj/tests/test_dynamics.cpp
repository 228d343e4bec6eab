#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "photonlim/dynamics.hpp"

using namespace photonlim;
using Catch::Approx;

namespace {
const SystemParams kRef = SystemParams::lambda(1.0, 0.5, 1.0);

double final_emission(double rate, double T, double dt) {
  DriveContext ctx;
  ctx.omega = [rate](double t) { return cplx(rate * t, 0.0); };
  const auto grid = uniform_grid(0.0, T, static_cast<std::size_t>(T / dt) + 1);
  const auto tr = integrate(kRef, ctx, {}, grid);
  return tr.emitted(grid.size() - 1);
}
} // namespace

TEST_CASE("no drive leaves the ground state untouched") {
  const auto grid = uniform_grid(0.0, 10.0, 101);
  DriveContext ctx;
  ctx.delta_u = 0.7;
  const auto tr = integrate(kRef, ctx, {}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(tr.alpha_u[i]) == Approx(1.0).margin(1e-12));
    CHECK(std::abs(tr.alpha_e[i]) == 0.0);
    CHECK(tr.emitted(i) == 0.0);
  }
  CHECK(std::arg(tr.alpha_u.back()) == Approx(std::remainder(-0.7 * 10.0, 2.0 * std::numbers::pi)).margin(1e-9));
}

TEST_CASE("instant excitation reaches the closed-form limit") {
  const auto grid = uniform_grid(0.0, 100.0, 10001);
  const auto tr = instant_excitation(kRef, grid);
  CHECK(instant_excitation_limit(kRef) == Approx(4.0 / 9.0).epsilon(1e-14));
  CHECK(tr.emitted(grid.size() - 1) == Approx(4.0 / 9.0).margin(1e-8));
  CHECK(tr.max_conservation_error < 1e-8);
}

TEST_CASE("halving the step changes results below 1e-8") {
  DriveContext ctx;
  ctx.omega = [](double t) { return cplx(0.3 * std::sin(0.4 * t), 0.1); };
  ctx.delta_e = 0.3;
  const SystemParams p(1.0, 0.5, {{1.0, 0.0, ""}, {0.6, 2.0, ""}});
  const auto grid = uniform_grid(0.0, 20.0, 2001);
  IntegrationOptions fine;
  fine.substeps = 2;
  const auto a = integrate(p, ctx, {}, grid);
  const auto b = integrate(p, ctx, {}, grid, fine);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(a.alpha_e[i] - b.alpha_e[i]) < 1e-8);
    CHECK(std::abs(a.alpha_g[1][i] - b.alpha_g[1][i]) < 1e-8);
  }
  CHECK(std::abs(a.emitted(2000) - b.emitted(2000)) < 1e-8);
  CHECK(b.max_conservation_error < 1e-8);
}

TEST_CASE("real drive on a resonant system keeps alpha_g real") {
  DriveContext ctx;
  ctx.omega = [](double t) { return cplx(0.2 * t, 0.0); };
  const auto grid = uniform_grid(0.0, 15.0, 1501);
  const auto tr = integrate(kRef, ctx, {}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(tr.alpha_u[i].imag() == 0.0);
    CHECK(tr.alpha_e[i].imag() == 0.0);
    CHECK(tr.alpha_g[0][i].imag() == 0.0);
  }
}

TEST_CASE("slower linear ramps approach the adiabatic limit from below") {
  const double fast = final_emission(0.2, 100.0, 0.01);
  const double slow = final_emission(0.02, 400.0, 0.01);
  CHECK(fast < slow);
  CHECK(slow < adiabatic_limit(kRef));
  CHECK(slow > adiabatic_limit(kRef) - 0.02);
}

TEST_CASE("a coarse grid is reported as an accuracy failure") {
  DriveContext ctx;
  ctx.omega = [](double) { return cplx(3.0, 0.0); };
  const auto grid = uniform_grid(0.0, 50.0, 26);
  CHECK_THROWS_AS(integrate(kRef, ctx, {}, grid), AccuracyError);
}

TEST_CASE("initial states above unit norm are rejected") {
  InitialState s;
  s.e = 0.5;
  CHECK_THROWS_AS(integrate(kRef, DriveContext{}, s, uniform_grid(0.0, 1.0, 11)), ConfigurationError);
}
