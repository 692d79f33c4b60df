// Copyright 2026 The msd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "msd/errors.hpp"
#include "msd/vecspace.hpp"

namespace msd {

// Residual energy t = |v_omega - P_{S_omega} v_omega|^2 together with the
// scaling that makes it comparable to the full-data residual.
struct ResidualReport {
  double t;
  Index m;
  Index n;
  double rescaled;  // (n/m) * t
};

namespace detail {
inline void check_triple(const SubspaceBasis& basis, const Vector& v,
                         const SampleIndexSet& omega, const char* where) {
  if (v.size() != basis.ambient_dim() ||
      omega.ambient_dim() != basis.ambient_dim()) {
    throw DimensionMismatch(std::string(where) +
                            ": basis, vector, and index set must share n");
  }
}
}  // namespace detail

// |v - P_S v|^2, the energy of v outside S.
inline double full_residual_energy(const SubspaceBasis& basis,
                                   const Vector& v) {
  return decompose(basis, v).perp.squaredNorm();
}

// The residual vector is formed explicitly and then squared. Computing
// |v_omega|^2 minus the fitted energy instead would cancel catastrophically
// when v is nearly in the span.
inline ResidualReport residual_energy(const SubspaceBasis& basis,
                                      const Vector& v,
                                      const SampleIndexSet& omega) {
  detail::check_triple(basis, v, omega, "residual_energy");
  const Vector v_omega = restrict_vector(v, omega);
  const Vector fitted =
      project_restricted(restrict_basis(basis, omega), v_omega);
  const double t = (v_omega - fitted).squaredNorm();
  const Index m = omega.size();
  const Index n = basis.ambient_dim();
  const double rescaled =
      static_cast<double>(n) / static_cast<double>(m) * t;
  return ResidualReport{t, m, n, rescaled};
}

// The zero-filling baseline t0 = |v_omega - (P_S v0)_omega|^2, where v0
// carries the observed entries of v and zeros elsewhere. Duplicate indices
// write the same value into v0 (idempotent) but still contribute duplicate
// entries to the final difference.
inline double zero_fill_residual(const SubspaceBasis& basis, const Vector& v,
                                 const SampleIndexSet& omega) {
  detail::check_triple(basis, v, omega, "zero_fill_residual");
  Vector v0 = Vector::Zero(basis.ambient_dim());
  for (Index i : omega.indices()) {
    v0(i) = v(i);
  }
  const Vector projected = project_full(basis, v0);
  const Vector diff =
      restrict_vector(v, omega) - restrict_vector(projected, omega);
  return diff.squaredNorm();
}

}  // namespace msd
