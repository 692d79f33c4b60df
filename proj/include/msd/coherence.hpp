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

struct CoherenceReport {
  double mu;
  Index argmax_index;  // standard basis element achieving the max; ties -> smallest
};

// mu(S) = (n/r) max_j |P_S e_j|^2. Since U is orthonormal, |P_S e_j|^2 is
// the squared norm of row j of U, so the projector is never formed.
inline CoherenceReport subspace_coherence(const SubspaceBasis& basis) {
  const Matrix& u = basis.matrix();
  Index best = 0;
  double best_norm2 = u.row(0).squaredNorm();
  for (Index j = 1; j < u.rows(); ++j) {
    const double norm2 = u.row(j).squaredNorm();
    if (norm2 > best_norm2) {
      best_norm2 = norm2;
      best = j;
    }
  }
  const double mu = static_cast<double>(basis.ambient_dim()) /
                    static_cast<double>(basis.dim()) * best_norm2;
  return CoherenceReport{mu, best};
}

// mu(z) = n |z|_inf^2 / |z|_2^2, the coherence of the line spanned by z.
inline CoherenceReport vector_coherence(const Vector& z) {
  if (z.size() < 1) {
    throw InvalidParameter("vector_coherence: empty vector");
  }
  const double total = z.squaredNorm();
  if (total == 0.0) {
    throw ZeroVector("vector_coherence: zero vector has no coherence");
  }
  Index best = 0;
  double best_sq = z(0) * z(0);
  for (Index j = 1; j < z.size(); ++j) {
    const double sq = z(j) * z(j);
    if (sq > best_sq) {
      best_sq = sq;
      best = j;
    }
  }
  const double mu = static_cast<double>(z.size()) * best_sq / total;
  return CoherenceReport{mu, best};
}

}  // namespace msd
