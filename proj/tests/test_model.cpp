#include <catch_amalgamated.hpp>

#include <cmath>

#include "photonlim/model.hpp"

using namespace photonlim;
using Catch::Approx;

namespace {
SystemParams zeeman_pair(double split) {
  return SystemParams(1.0, 0.6,
                      {{std::sqrt(1.0 / 3.0), 0.0, "s+"}, {-std::sqrt(4.0 / 15.0), split, "pi"}});
}
} // namespace

TEST_CASE("parameter validation rejects unphysical inputs") {
  CHECK_THROWS_AS(SystemParams(0.0, 1.0, {{1.0, 0.0, ""}}), ConfigurationError);
  CHECK_THROWS_AS(SystemParams(1.0, -1.0, {{1.0, 0.0, ""}}), ConfigurationError);
  CHECK_THROWS_AS(SystemParams(1.0, 1.0, {}), ConfigurationError);
  CHECK_THROWS_AS(SystemParams(1.0, 1.0, {{0.0, 0.0, ""}}), ConfigurationError);
  CHECK_THROWS_AS(SystemParams(1.0, 1.0, {{1.0, NAN, ""}}), ConfigurationError);
}

TEST_CASE("cooperativity per channel") {
  CHECK(cooperativity(SystemParams::lambda(1.0, 0.5, 1.0), 0) == Approx(1.0));
  const auto p = zeeman_pair(0.0);
  CHECK(cooperativity(p, 0) == Approx(5.0 / 18.0).epsilon(1e-14));
  CHECK(cooperativity(p, 1) == Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK_THROWS_AS(cooperativity(p, 2), IndexError);
}

TEST_CASE("cooperativity ignores the sign of the coupling") {
  CHECK(cooperativity(SystemParams::lambda(1.3, 0.2, -0.7), 0) ==
        cooperativity(SystemParams::lambda(1.3, 0.2, 0.7), 0));
}

TEST_CASE("critical time branches") {
  const double g = 1.0;
  CHECK(critical_time(SystemParams::lambda(10.0 * g, g / 20.0, g)) == Approx(10.0 / g));
  CHECK(critical_time(SystemParams::lambda(g, g / 2.0, g)) == Approx(1.0));
  CHECK(critical_time(SystemParams::lambda(0.1 * g, 5.0 * g, g)) == Approx(10.0 / g));
  CHECK_THROWS_AS(critical_time(zeeman_pair(1.0)), UnsupportedConfiguration);
  // Both branches agree at kappa = g.
  const double lo = critical_time(SystemParams::lambda(1.0 - 1e-9, 1.0, 1.0));
  const double hi = critical_time(SystemParams::lambda(1.0 + 1e-9, 1.0, 1.0));
  CHECK(std::abs(lo - hi) < 1e-8);
}

TEST_CASE("adiabatic and instant-excitation limits") {
  CHECK(adiabatic_limit(SystemParams::lambda(1.0, 0.5, 1.0)) == Approx(2.0 / 3.0));
  CHECK(adiabatic_limit(SystemParams::lambda(1.0, 1.0, 1.0)) == Approx(0.5));
  CHECK(adiabatic_limit(SystemParams::lambda(1.0, 1e-9, 1.0)) == Approx(1.0).margin(1e-8));
  CHECK(instant_excitation_limit(SystemParams::lambda(1.0, 0.5, 1.0)) == Approx(4.0 / 9.0));
  CHECK(instant_excitation_limit(SystemParams::lambda(10.0, 0.05, 1.0)) ==
        Approx(10.0 / 10.05 * 2.0 / 3.0));
  CHECK(instant_excitation_limit(SystemParams::lambda(0.1, 5.0, 1.0)) ==
        Approx(0.1 / 5.1 * 2.0 / 3.0));
  CHECK(instant_excitation_limit(SystemParams::lambda(1.0, 1e-12, 1.0)) ==
        Approx(adiabatic_limit(SystemParams::lambda(1.0, 1e-12, 1.0))).epsilon(1e-10));
}

TEST_CASE("instant limit never exceeds adiabatic limit") {
  for (double k : {0.1, 1.0, 7.0})
    for (double gam : {0.01, 0.5, 3.0})
      for (double g : {0.2, 1.0, 5.0}) {
        const auto p = SystemParams::lambda(k, gam, g);
        CHECK(instant_excitation_limit(p) < adiabatic_limit(p));
      }
}

TEST_CASE("derived quantities for a multi-channel system use the effective coupling") {
  const auto d = derive(zeeman_pair(3.0));
  CHECK(d.effective_coupling * d.effective_coupling == Approx(1.0 / 3.0 + 4.0 / 15.0));
  CHECK(d.channel_cooperativity.size() == 2);
  CHECK(d.cooperativity == Approx(0.6 / 1.2));
  CHECK(d.instant_limit <= d.adiabatic_limit);
}

TEST_CASE("infinite-time product limits for the two-channel system") {
  const auto p = zeeman_pair(0.0);
  CHECK(product_limit_degenerate(p) == Approx(5.0 / 81.0).epsilon(1e-12));
  // A quarter of the product of per-channel adiabatic limits, C_1 = 5/18, C_2 = 2/9.
  const double a = (5.0 / 9.0) / (14.0 / 9.0), b = (4.0 / 9.0) / (13.0 / 9.0);
  CHECK(product_limit_decoupled(p) == Approx(a * b / 4.0).epsilon(1e-12));
  CHECK(product_limit_decoupled(p) == Approx(0.0274725).epsilon(1e-5));
}

TEST_CASE("detuning centering removes the coupling-weighted mean") {
  const auto c = centered_detunings(zeeman_pair(20.0));
  double s = 0.0;
  for (const auto &ch : c.channels()) s += ch.coupling * ch.coupling * ch.detuning;
  CHECK(std::abs(s) < 1e-12);
  CHECK(c.channel(1).detuning - c.channel(0).detuning == Approx(20.0));
}
