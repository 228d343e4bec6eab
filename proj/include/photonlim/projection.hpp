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

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "model.hpp"
#include "spectral.hpp"

namespace photonlim {

/// Squared residual below which a constraint counts as dependent on earlier ones.
/// It is the ratio of successive Gram determinants of the normalized vectors.
inline constexpr double kDegeneracyTolerance = 1e-8;

/// Orthonormal change of basis separating the initial-vacancy constraints.
///
/// Rows of `U` are conjugated basis vectors: the first `projected_dim` rows
/// span the admissible subspace, the last `degenerate_count` rows span the
/// constraint vectors.
struct ProjectionData {
  std::vector<CVector> constraint_vectors;
  CMatrix U;
  std::size_t degenerate_count = 0; ///< j_M^d
  std::size_t projected_dim = 0;

  std::size_t full_dim() const noexcept { return static_cast<std::size_t>(U.rows()); }

  /// Pi U: full-space vector to projected coordinates.
  auto projector() const { return U.topRows(static_cast<Eigen::Index>(projected_dim)); }

  CVector project(const CVector &v) const {
    if (static_cast<std::size_t>(v.size()) != full_dim()) throw UsageError("vector length mismatch");
    return projector() * v;
  }

  /// U^dagger Pi~ w: projected coordinates back to a full Fourier vector.
  CVector lift(const CVector &w) const {
    if (static_cast<std::size_t>(w.size()) != projected_dim)
      throw UsageError("projected vector length mismatch");
    return projector().adjoint() * w;
  }
};

namespace detail {
/// Modified Gram-Schmidt with one reorthogonalization pass against `basis`.
inline CVector orthogonalize(CVector v, const std::vector<CVector> &basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto &q : basis) v -= q * q.dot(v);
  return v;
}
} // namespace detail

/// Squared norm of the part of each normalized vector not spanned by its
/// predecessors; the product of these is the Gram determinant.
inline std::vector<double> gram_residuals(const std::vector<CVector> &vectors) {
  std::vector<CVector> basis;
  std::vector<double> out;
  for (const auto &phi : vectors) {
    const double nrm = phi.norm();
    if (nrm == 0.0) {
      out.push_back(0.0);
      continue;
    }
    const CVector r = detail::orthogonalize(phi / nrm, basis);
    out.push_back(r.squaredNorm());
    if (r.norm() > 0.0) basis.push_back(r / r.norm());
  }
  return out;
}

inline double gram_determinant(const std::vector<CVector> &vectors) {
  double det = 1.0;
  for (double r : gram_residuals(vectors)) det *= r;
  return det;
}

/// phi_j with phi_j^dagger C = sum_n f_n^(1->j) C_n, so phi_j = conj(f^(1->j)).
/// Constraints whose Gram residual falls below `tolerance` are dropped as
/// duplicates of earlier channels.
inline std::vector<CVector> constraint_vectors(const FourierBasis &b, const SystemParams &p,
                                               double tolerance = kDegeneracyTolerance) {
  std::vector<CVector> kept;
  std::vector<CVector> basis;
  for (std::size_t j = 0; j < p.channel_count(); ++j) {
    const CVector phi = conversion_factors(b, p, j).conjugate();
    const CVector r = detail::orthogonalize(phi / phi.norm(), basis);
    if (r.squaredNorm() < tolerance) continue;
    basis.push_back(r / r.norm());
    kept.push_back(phi);
  }
  return kept;
}

inline ProjectionData build_projection(const std::vector<CVector> &vectors, const FourierBasis &b) {
  const auto n = static_cast<Eigen::Index>(b.size());
  if (vectors.empty()) throw ConfigurationError("projection needs at least one constraint");
  if (vectors.size() >= b.size()) throw ConfigurationError("more constraints than basis states");

  std::vector<CVector> q;
  for (const auto &phi : vectors) {
    if (phi.size() != n) throw UsageError("constraint vector length does not match basis");
    const double nrm = phi.norm();
    if (nrm == 0.0) throw DegeneracyError("zero constraint vector");
    const CVector r = detail::orthogonalize(phi / nrm, q);
    if (r.squaredNorm() < kDegeneracyTolerance)
      throw DegeneracyError("constraint vectors are nearly dependent (Gram determinant below 1e-8); "
                            "merge degenerate channels first");
    q.push_back(r / r.norm());
  }

  const auto d = static_cast<Eigen::Index>(q.size());
  CMatrix E(n, d);
  for (Eigen::Index k = 0; k < d; ++k) E.col(k) = q[static_cast<std::size_t>(k)];

  // Householder QR of E gives a full unitary whose trailing columns are the complement.
  Eigen::HouseholderQR<CMatrix> qr(E);
  const CMatrix Q = qr.householderQ() * CMatrix::Identity(n, n);

  ProjectionData out;
  out.constraint_vectors = vectors;
  out.degenerate_count = static_cast<std::size_t>(d);
  out.projected_dim = static_cast<std::size_t>(n - d);
  out.U.resize(n, n);
  out.U.topRows(n - d) = Q.rightCols(n - d).adjoint();
  out.U.bottomRows(d) = E.adjoint();
  return out;
}

inline ProjectionData build_projection(const FourierBasis &b, const SystemParams &p) {
  return build_projection(constraint_vectors(b, p), b);
}

/// P^P = Pi U P U^dagger Pi~.
inline CMatrix project_matrix(const CMatrix &P, const ProjectionData &proj) {
  if (static_cast<std::size_t>(P.rows()) != proj.full_dim() ||
      static_cast<std::size_t>(P.cols()) != proj.full_dim())
    throw UsageError("matrix dimension does not match projection");
  const auto pr = proj.projector();
  CMatrix out = pr * P * pr.adjoint();
  return 0.5 * (out + out.adjoint());
}

} // namespace photonlim
