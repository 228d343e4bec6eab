#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "photonlim/projection.hpp"

using namespace photonlim;
using Catch::Approx;

namespace {
SystemParams pair(double split) {
  return SystemParams(1.0, 0.6, {{std::sqrt(1.0 / 3.0), 0.0, ""}, {-std::sqrt(4.0 / 15.0), split, ""}});
}

CVector random_vector(Eigen::Index n, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  CVector v(n);
  for (auto &x : v) x = cplx(nd(rng), nd(rng));
  return v;
}

double initial_amplitude(const FourierBasis &b, const SystemParams &p, std::size_t j, const CVector &c) {
  const std::vector<double> t0{0.0};
  return std::abs(synthesize_time_domain({b, c}, p, j, t0).derivative[0][0]);
}
} // namespace

TEST_CASE("single channel constraint is the all-ones vector") {
  const auto b = build_basis(2.0, 2.5, 8);
  const auto v = constraint_vectors(b, SystemParams::lambda(1.0, 0.5, 1.0));
  REQUIRE(v.size() == 1);
  CHECK((v[0] - CVector::Ones(17)).norm() == 0.0);
}

TEST_CASE("degenerate channels collapse and split channels do not") {
  const auto b = build_basis(5.0, 6.25, 32);
  CHECK(constraint_vectors(b, pair(0.0)).size() == 1);
  const auto split = constraint_vectors(b, pair(5.0));
  REQUIRE(split.size() == 2);
  CHECK(gram_determinant(split) > 1e-8);
  const auto near = constraint_vectors(b, pair(1e-6));
  CHECK(near.size() == 1);
}

TEST_CASE("nearly dependent constraints are refused by build_projection") {
  const auto b = build_basis(5.0, 6.25, 32);
  const auto p = pair(1e-6);
  const std::vector<CVector> both{conversion_factors(b, p, 0).conjugate(), conversion_factors(b, p, 1).conjugate()};
  CHECK(gram_determinant(both) < 1e-8);
  CHECK_THROWS_AS(build_projection(both, b), DegeneracyError);
}

TEST_CASE("projection is unitary and aligned with the constraints") {
  const auto b = build_basis(5.0, 6.25, 32);
  for (double split : {0.0, 5.0}) {
    const auto p = pair(split);
    const auto proj = build_projection(b, p);
    const auto n = static_cast<Eigen::Index>(b.size());
    CHECK((proj.U.adjoint() * proj.U - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(proj.projected_dim + proj.degenerate_count == b.size());
    // Every constraint lies in the span of the last rows.
    const auto d = static_cast<Eigen::Index>(proj.degenerate_count);
    const CMatrix last = proj.U.bottomRows(d);
    for (const auto &phi : proj.constraint_vectors) {
      const CVector resid = phi - last.adjoint() * (last * phi);
      CHECK(resid.norm() < 1e-10 * phi.norm());
    }
  }
}

TEST_CASE("constraint vector itself projects to zero") {
  const auto b = build_basis(2.0, 2.5, 8);
  const auto proj = build_projection(b, SystemParams::lambda(1.0, 0.5, 1.0));
  CHECK(proj.project(CVector::Ones(17)).norm() < 1e-13);
}

TEST_CASE("projected vectors start with empty cavities") {
  std::mt19937_64 rng(21);
  const auto b = build_basis(5.0, 6.25, 32);
  for (const auto &p : {SystemParams::lambda(1.0, 0.5, 1.0), pair(5.0), pair(20.0)}) {
    const auto proj = build_projection(b, p);
    for (int rep = 0; rep < 100; ++rep) {
      const CVector c = proj.lift(random_vector(static_cast<Eigen::Index>(proj.projected_dim), rng));
      for (std::size_t j = 0; j < p.channel_count(); ++j) CHECK(initial_amplitude(b, p, j, c) < 1e-10);
    }
  }
}

TEST_CASE("projector algebra") {
  std::mt19937_64 rng(4);
  const auto b = build_basis(5.0, 6.25, 16);
  const auto proj = build_projection(b, pair(5.0));
  const auto m = static_cast<Eigen::Index>(proj.projected_dim);
  const CMatrix pp = proj.projector() * proj.projector().adjoint();
  CHECK((pp - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-12);
  const CVector w = random_vector(m, rng);
  CHECK((proj.project(proj.lift(w)) - w).norm() < 1e-12 * w.norm());
  CHECK_THROWS_AS(proj.lift(CVector::Zero(m + 1)), UsageError);
}

TEST_CASE("projected matrices preserve expectations") {
  std::mt19937_64 rng(8);
  const auto b = build_basis(5.0, 6.25, 16);
  const auto p = pair(5.0);
  const auto proj = build_projection(b, p);
  const auto m = static_cast<Eigen::Index>(proj.projected_dim);
  const auto n = static_cast<Eigen::Index>(b.size());
  CHECK((project_matrix(CMatrix::Identity(n, n), proj) - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-12);
  for (const auto &k : {Probability::emission(0), Probability::emission(1), Probability::total()}) {
    const CMatrix full = probability_matrix(b, p, k, 3.1).entries;
    const CMatrix pm = project_matrix(full, proj);
    CHECK((pm - pm.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    const CVector w = random_vector(m, rng);
    const CVector v = proj.lift(w);
    CHECK(w.dot(pm * w).real() == Approx(v.dot(full * v).real()).epsilon(1e-10));
    if (k == Probability::total()) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(pm, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10 * pm.trace().real());
    }
  }
  CHECK_THROWS_AS(project_matrix(CMatrix::Identity(n - 1, n - 1), proj), UsageError);
}
