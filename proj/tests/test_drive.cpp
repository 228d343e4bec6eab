#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "photonlim/drive.hpp"
#include "photonlim/optimizer.hpp"

using namespace photonlim;
using Catch::Approx;

namespace {
const SystemParams kRef = SystemParams::lambda(1.0, 0.5, 1.0);

struct Setup {
  AnalyticBoundResult bound;
  std::vector<double> grid;
};

Setup bound_setup(const SystemParams &p, double T) {
  return {lower_bound(p, T), uniform_grid(0.0, T, 2001)};
}

DriveContext context(double chi, double theta0 = 0.0) {
  DriveContext c;
  c.chi = chi;
  c.theta0 = theta0;
  return c;
}

std::vector<double> zero_crossings(const DrivePulse &pulse) {
  std::vector<double> z;
  for (std::size_t i = 1; i < pulse.omega.size(); ++i) {
    const double a = pulse.omega[i - 1].real(), b = pulse.omega[i].real();
    if ((a < 0.0) != (b < 0.0))
      z.push_back(pulse.times[i - 1] + (pulse.times[i] - pulse.times[i - 1]) * a / (a - b));
  }
  return z;
}
} // namespace

TEST_CASE("lower-bound wavepacket gives a real drive that reproduces it") {
  const auto s = bound_setup(kRef, 2.5);
  const SineWavepacket wp(s.bound.amplitude_lower(), s.bound.omega_m);
  const auto ctx = context(0.05);
  const auto pulse = reconstruct_drive(wp, kRef, ctx, s.grid);
  REQUIRE(pulse.times.size() == 4 * (s.grid.size() - 1) + 1);
  CHECK(pulse.max_abs_imag() < 1e-8 * pulse.max_abs());
  CHECK_FALSE(pulse.chi_warning);
  const auto res = verify_drive(pulse, kRef, ctx, wp, s.grid);
  CHECK(res.dynamic_l2 < 1e-6);
  CHECK(res.algebraic < 1e-6);
  CHECK(res.simulated_emission == Approx(s.bound.p_lower * 0.95 * 0.95).epsilon(1e-6));
}

TEST_CASE("real-amplitude path agrees with the primary reconstruction") {
  const auto s = bound_setup(kRef, 5.0);
  const SineWavepacket wp(s.bound.amplitude_lower(), s.bound.omega_m);
  const auto ctx = context(0.02);
  const auto a = reconstruct_drive(wp, kRef, ctx, s.grid);
  const auto b = reconstruct_drive_real(wp, kRef, ctx, s.grid);
  REQUIRE(a.omega.size() == b.pulse.omega.size());
  for (std::size_t i = 0; i < a.omega.size(); ++i)
    CHECK(std::abs(a.omega[i] - b.pulse.omega[i]) < 1e-5 * a.max_abs());
  CHECK(b.sign_ambiguities == 0);
  SystemParams detuned(1.0, 0.5, {{1.0, 0.3, ""}});
  CHECK_THROWS_AS(reconstruct_drive_real(wp, detuned, ctx, s.grid), UnsupportedConfiguration);
}

TEST_CASE("peak drive grows as the amplitude margin shrinks") {
  const auto s = bound_setup(kRef, 2.5);
  const SineWavepacket wp(s.bound.amplitude_lower(), s.bound.omega_m);
  double prev = 0.0;
  for (double chi : {0.2, 0.1, 0.05, 0.02}) {
    const double m = reconstruct_drive(wp, kRef, context(chi), s.grid).max_abs();
    CHECK(m > prev);
    prev = m;
  }
  CHECK(reconstruct_drive(wp, kRef, context(0.01), s.grid).chi_warning);
}

TEST_CASE("drive zeros depend only on the wavepacket shape") {
  const auto s = bound_setup(SystemParams::lambda(1.0, 0.05, 0.3), 40.0);
  const SineWavepacket full(s.bound.amplitude_lower(), s.bound.omega_m);
  const SineWavepacket half(0.5 * s.bound.amplitude_lower(), s.bound.omega_m);
  const auto p = SystemParams::lambda(1.0, 0.05, 0.3);
  const auto za = zero_crossings(reconstruct_drive(full, p, context(0.05), s.grid));
  const auto zb = zero_crossings(reconstruct_drive(half, p, context(0.05), s.grid));
  REQUIRE_FALSE(za.empty());
  REQUIRE(za.size() == zb.size());
  for (std::size_t i = 0; i < za.size(); ++i) CHECK(za[i] == Approx(zb[i]).margin(1e-3));
}

TEST_CASE("zero wavepacket needs no drive") {
  const auto grid = uniform_grid(0.0, 3.0, 301);
  const SineWavepacket wp(0.0, 1.0);
  const auto ctx = context(0.05);
  const auto pulse = reconstruct_drive(wp, kRef, ctx, grid);
  CHECK(pulse.max_abs() == 0.0);
  const auto res = verify_drive(pulse, kRef, ctx, wp, grid);
  CHECK(res.dynamic_l2 == 0.0);
  CHECK(res.algebraic == 0.0);
}

TEST_CASE("a corrupted pulse fails verification") {
  const auto s = bound_setup(kRef, 2.5);
  const SineWavepacket wp(s.bound.amplitude_lower(), s.bound.omega_m);
  const auto ctx = context(0.05);
  auto pulse = reconstruct_drive(wp, kRef, ctx, s.grid);
  for (auto &o : pulse.omega) o *= 1.1;
  const auto res = verify_drive(pulse, kRef, ctx, wp, s.grid);
  CHECK(res.dynamic_l2 > 1e-2);
  CHECK(res.algebraic > 1e-2);
}

TEST_CASE("initial phase changes the drive but not the extraction") {
  const auto s = bound_setup(kRef, 5.0);
  const SineWavepacket wp(s.bound.amplitude_lower(), s.bound.omega_m);
  double ref_emission = -1.0;
  std::vector<cplx> ref_omega;
  for (double th : {0.0, 1.0, 2.5, 4.0}) {
    DriveContext ctx = context(0.02, th);
    ctx.delta_u = 0.4;
    const auto pulse = reconstruct_drive(wp, kRef, ctx, s.grid);
    const auto res = verify_drive(pulse, kRef, ctx, wp, s.grid);
    CHECK(res.dynamic_l2 < 1e-6);
    if (ref_emission < 0.0) {
      ref_emission = res.simulated_emission;
      ref_omega = pulse.omega;
    } else {
      CHECK(res.simulated_emission == Approx(ref_emission).margin(1e-6));
      CHECK(std::abs(pulse.omega.back() - ref_omega.back()) > 1e-3);
    }
  }
}

TEST_CASE("an unreachable initial excitation is reported as a singularity") {
  const auto grid = uniform_grid(0.0, 2.0, 201);
  const SineWavepacket wp(2.0, 1.0); // alpha_e(0) = -2 omega / g
  try {
    (void)reconstruct_drive(wp, kRef, context(0.05), grid);
    FAIL("expected a singularity");
  } catch (const ReconstructionSingularity &e) {
    CHECK(e.failure_time == 0.0);
  }
}

TEST_CASE("optimized wavepackets reconstruct after low-pass filtering") {
  const double T = 5.0;
  const auto target = OptimizationTarget::product({{Probability::emission(0), T}}, T);
  OptimizerConfig cfg;
  cfg.max_iterations = 2000;
  const auto prob = make_problem(kRef, target, cfg);
  const auto sol = optimize(prob, cfg);
  const int cut = static_cast<int>(prob.basis().positive_count() / 2);
  const auto prep = prepare_wavepacket(sol.coefficients, prob.basis(), kRef, prob.projection(), cut);
  CHECK(prep.lowpass_l2_delta < 0.05);
  const FourierWavepacket wp({prob.basis(), prep.coefficients}, kRef);
  CHECK(std::abs(wp.derivatives(0, 0.0)[0]) < 1e-10);
  const auto ctx = context(kDefaultChiNumeric);
  const auto grid = uniform_grid(0.0, T, 1001);
  const auto pulse = reconstruct_drive(wp, kRef, ctx, grid);
  const auto res = verify_drive(pulse, kRef, ctx, wp, grid);
  CHECK(res.dynamic_l2 < 1e-2);
  CHECK(res.simulated_emission == Approx(sol.objective * 0.95 * 0.95).epsilon(0.02));
}
