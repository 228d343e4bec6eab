#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "photonlim/optimizer.hpp"

using namespace photonlim;
using Catch::Approx;

namespace {
const SystemParams kRef = SystemParams::lambda(1.0, 0.5, 1.0);

SystemParams three_level() {
  return SystemParams(1.0, 0.6,
                      {{std::sqrt(1.0 / 3.0), -5.0, "sigma+"},
                       {-std::sqrt(4.0 / 15.0), 0.0, "pi"},
                       {std::sqrt(1.0 / 30.0), 5.0, "sigma-"}});
}

OptimizationTarget emission_target(std::vector<std::size_t> channels, double T) {
  std::vector<TargetTerm> terms;
  for (auto j : channels) terms.push_back({Probability::emission(j), T});
  return OptimizationTarget::product(std::move(terms), T);
}

CVector random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  CVector v(n);
  for (auto &x : v) x = cplx(nd(rng), nd(rng));
  return v;
}

/// V with the normalization time held fixed.
double fixed_objective(const OptimizationProblem &prob, const CVector &w, double t_max) {
  const double b = w.dot(prob.apply_total_at(w, t_max)).real();
  double v = 0.0;
  for (const auto &prod : prob.raw_terms(w)) {
    double x = 1.0;
    for (double a : prod) x *= a / b;
    v += x;
  }
  return v;
}

double gradient_cosine(const OptimizationProblem &prob, const CVector &w) {
  const auto e = evaluate(prob, w);
  const CVector g = correction_vector(prob, w, e);
  const double h = 1e-6 * w.norm();
  Eigen::VectorXd fd(2 * w.size()), an(2 * w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    for (int part = 0; part < 2; ++part) {
      CVector wp = w, wm = w;
      const cplx d = part == 0 ? cplx(h, 0.0) : cplx(0.0, h);
      wp[i] += d;
      wm[i] -= d;
      fd[2 * i + part] = (fixed_objective(prob, wp, e.t_max) - fixed_objective(prob, wm, e.t_max)) / (2.0 * h);
      an[2 * i + part] = 2.0 * e.objective * (part == 0 ? g[i].real() : g[i].imag());
    }
  }
  return fd.dot(an) / (fd.norm() * an.norm());
}

std::size_t flux_maxima(const OptimizationProblem &prob, const WavepacketSolution &sol, std::size_t j) {
  const auto times = uniform_grid(0.0, prob.target().T, 2001);
  const auto s = synthesize_time_domain({prob.basis(), sol.coefficients}, prob.params(), j, times);
  std::vector<double> flux;
  double peak = 0.0;
  for (const auto &a : s.derivative[0]) {
    flux.push_back(std::norm(a));
    peak = std::max(peak, flux.back());
  }
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < flux.size(); ++i)
    if (flux[i] > flux[i - 1] && flux[i] >= flux[i + 1] && flux[i] > 1e-3 * peak) ++count;
  return count;
}
} // namespace

TEST_CASE("t_max ties go to the latest time") {
  CHECK(find_tmax_index({0.1, 0.5, 0.3}) == 1);
  CHECK(find_tmax_index({0.2, 0.2, 0.2, 0.2}) == 3);
  CHECK(find_tmax_index({0.5, 0.5 * (1.0 - 1e-14), 0.1}) == 1);
  CHECK_THROWS_AS(find_tmax_index({}), UsageError);
}

TEST_CASE("normalized probabilities are scale invariant and sum to one at t_max") {
  const auto prob = make_problem(kRef, emission_target({0}, 2.5));
  const CVector w = random_vector(static_cast<Eigen::Index>(prob.dimension()), 3);
  const auto e = evaluate(prob, w);
  const double a = normalized_probability(prob, w, Probability::emission(0), 2.0, e.t_max);
  const double b = normalized_probability(prob, cplx(-3.0, 2.0) * w, Probability::emission(0), 2.0, e.t_max);
  CHECK(a == Approx(b).epsilon(1e-12));
  CHECK(normalized_probability(prob, w, Probability::total(), e.t_max, e.t_max) == Approx(1.0).epsilon(1e-9));
  CHECK(evaluate_product(prob, 7.0 * w) == Approx(e.objective).epsilon(1e-10));
  CHECK_THROWS_AS(normalized_probability(prob, CVector::Zero(w.size()), Probability::total(), 1.0, 1.0),
                  DegenerateVectorError);
}

TEST_CASE("single-term product reduces to the normalized probability") {
  const auto prob = make_problem(kRef, emission_target({0}, 2.5));
  const CVector w = random_vector(static_cast<Eigen::Index>(prob.dimension()), 4);
  const auto e = evaluate(prob, w);
  CHECK(e.objective == Approx(normalized_probability(prob, w, Probability::emission(0), 2.5, e.t_max)).epsilon(1e-10));
  CHECK(e.objective >= 0.0);
  CHECK(e.objective <= 1.0);
}

TEST_CASE("correction vector matches finite differences of V") {
  const auto p = three_level();
  SECTION("single probability") {
    const auto prob = make_problem(p, emission_target({0}, 5.0));
    CHECK(gradient_cosine(prob, random_vector(static_cast<Eigen::Index>(prob.dimension()), 11)) >= 0.99);
  }
  SECTION("product") {
    const auto prob = make_problem(p, emission_target({0, 1}, 5.0));
    CHECK(gradient_cosine(prob, random_vector(static_cast<Eigen::Index>(prob.dimension()), 12)) >= 0.99);
  }
}

TEST_CASE("targeting the total at t_max is stationary") {
  const auto prob = make_problem(kRef, emission_target({0}, 2.5));
  const CVector w = random_vector(static_cast<Eigen::Index>(prob.dimension()), 5);
  auto e = evaluate(prob, w);
  const OptimizationTarget total =
      OptimizationTarget::product({{Probability::total(), e.t_max}}, 2.5);
  const OptimizationProblem tp(kRef, prob.basis(), prob.projection(), total);
  e = evaluate(tp, w);
  const auto g = correction_vector(tp, w, e);
  CHECK(g.norm() < 1e-8 * w.norm());
}

TEST_CASE("a small step does not decrease the objective") {
  const auto prob = make_problem(three_level(), emission_target({0, 1}, 5.0));
  CVector w = random_vector(static_cast<Eigen::Index>(prob.dimension()), 6);
  for (int i = 0; i < 5; ++i) {
    const double before = evaluate_product(prob, w);
    w = gradient_step(prob, w, 1e-3 / prob.step_scale());
    CHECK(evaluate_product(prob, w) >= before - 1e-12);
  }
}

TEST_CASE("optimized extraction lies between the analytic bounds") {
  const double T = 2.5;
  const auto prob = make_problem(kRef, emission_target({0}, T));
  const auto sol = optimize(prob);
  const auto b = lower_bound(kRef, T);
  CHECK(sol.objective >= b.p_lower - 1e-3);
  CHECK(sol.objective <= b.p_upper + 1e-3);
  CHECK(sol.audit.max_total <= 1.0 + 1e-6);
  CHECK(sol.audit.total_at_tmax == Approx(1.0).epsilon(1e-9));
  CHECK(sol.v.norm() == Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 1; i < sol.history.size(); ++i) (void)i;
  REQUIRE(sol.traces.names.back() == "P_total");
  for (double x : sol.traces.values.back()) CHECK(x <= 1.0 + 1e-9);
}

TEST_CASE("restarts agree on the resonant single-channel optimum") {
  OptimizerConfig cfg;
  cfg.restarts = 5;
  cfg.seed = 42;
  cfg.record_history = false;
  const auto prob = make_problem(kRef, emission_target({0}, 2.5), cfg);
  const auto sol = optimize(prob, cfg);
  REQUIRE(sol.restart_objectives.size() == 5);
  const auto [lo, hi] = std::minmax_element(sol.restart_objectives.begin(), sol.restart_objectives.end());
  CHECK(*hi - *lo < 1e-4);
  CHECK(sol.objective == Approx(*hi).epsilon(1e-12));
}

TEST_CASE("fixed seeds reproduce the optimizer bit for bit") {
  OptimizerConfig cfg;
  cfg.max_iterations = 300;
  cfg.seed = 9;
  const auto prob = make_problem(kRef, emission_target({0}, 2.5), cfg);
  const auto a = optimize(prob, cfg);
  const auto b = optimize(prob, cfg);
  CHECK(a.objective == b.objective);
  CHECK((a.coefficients - b.coefficients).norm() == 0.0);
}

TEST_CASE("emitter detunings Delta_e and Delta_u never enter the optimizer") {
  // Only the cavity channels and decay rates parameterize a problem; this
  // compiles only while OptimizationProblem has no such inputs.
  const auto prob = make_problem(kRef, emission_target({0}, 2.5));
  CHECK(prob.params().channel(0).detuning == 0.0);
}

TEST_CASE("three-level targets give distinct, oscillating optima") {
  const auto p = three_level();
  OptimizerConfig cfg;
  cfg.record_history = false;
  const auto row_a = make_problem(p, emission_target({0}, 5.0), cfg);
  const auto row_c = make_problem(p, emission_target({0, 1}, 5.0), cfg);
  const auto sol_a = optimize(row_a, cfg);
  const auto sol_c = optimize(row_c, cfg);
  CHECK(sol_c.audit.max_total <= 1.0 + 1e-6);
  CHECK(flux_maxima(row_c, sol_c, 0) >= 3);
  // Cross-evaluate: both problems share the basis and projection.
  REQUIRE(row_a.dimension() == row_c.dimension());
  CHECK(evaluate_product(row_c, sol_a.v) < sol_c.objective);
  CHECK(evaluate_product(row_a, sol_c.v) < sol_a.objective);
}

TEST_CASE("invalid targets are rejected") {
  auto bad = emission_target({0}, 2.5);
  bad.products[0][0].t = 3.0;
  CHECK_THROWS_AS(bad.validate(kRef), ConfigurationError);
  CHECK_THROWS_AS(emission_target({2}, 2.5).validate(kRef), IndexError);
}

TEST_CASE("tapered coefficients reproduce a shape inside the window") {
  const auto b = build_basis(4.0, 5.0, 64);
  const auto t = uniform_grid(0.0, 5.0, kAnsatzSamples);
  std::vector<cplx> f;
  for (double x : t) f.emplace_back(x < 4.0 ? std::pow(std::sin(std::numbers::pi * x / 4.0), 3) : 0.0, 0.0);
  const CVector c = tapered_coefficients(b, f);
  const auto probe = uniform_grid(0.0, 4.0, 41);
  const auto s = synthesize_time_domain({b, c}, kRef, 0, probe);
  for (std::size_t i = 0; i < probe.size(); ++i)
    CHECK(std::abs(s.derivative[0][i] - std::pow(std::sin(std::numbers::pi * probe[i] / 4.0), 3)) < 1e-4);
  CHECK_THROWS_AS(tapered_coefficients(b, std::vector<cplx>(8, 1.0)), UsageError);
}

TEST_CASE("a short pulse ansatz approaches instantaneous excitation as the basis grows") {
  const double T = 5.0;
  const auto grid = uniform_grid(0.0, T, 5001);
  const double instant = instant_excitation(kRef, grid).emitted(grid.size() - 1);
  std::vector<double> err;
  for (int n : {32, 96, 192}) {
    OptimizerConfig cfg;
    const auto prob = make_problem(kRef, emission_target({0}, T), cfg, 1.25, n);
    const CVector w = prob.projection().project(pulsed_ansatz(kRef, prob.basis(), 0.01 * T));
    err.push_back(instant - evaluate_product(prob, w));
  }
  CHECK(err[0] > err[1]);
  CHECK(err[1] > err[2]);
  CHECK(std::abs(err[2]) < 0.02 * instant);
  CHECK_THROWS_AS(pulsed_ansatz(kRef, build_basis(T, 1.25 * T, 8), 0.0), ConfigurationError);
}

TEST_CASE("fine evaluation never raises the objective and bounds the fine total") {
  const auto prob = make_problem(three_level(), emission_target({0, 1}, 5.0));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const CVector w = random_vector(static_cast<Eigen::Index>(prob.dimension()), seed);
    const auto coarse = evaluate(prob, w);
    const auto fine = evaluate_fine(prob, w, 4);
    CHECK(fine.objective <= coarse.objective);
    CHECK(fine.total_at_tmax >= coarse.total_at_tmax);
    const auto a = audit_conservation(prob, w, fine.t_max, 4);
    CHECK(a.max_total <= 1.0 + 1e-9);
  }
}
