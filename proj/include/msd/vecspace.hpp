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

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "msd/errors.hpp"

namespace msd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Singular values (and pivoted-QR diagonals) below kRankTolerance times the
// largest one are treated as zero.
inline constexpr double kRankTolerance = 1e-10;

// Orthonormality of a basis is enforced to this absolute deviation of U^T U
// from the identity.
inline constexpr double kOrthoTolerance = 1e-10;

enum class SampleMode { with_replacement, without_replacement };

inline const char* to_string(SampleMode mode) {
  return mode == SampleMode::with_replacement ? "with" : "without";
}

// An ordered list of m row indices in [0, n). Duplicates are permitted only
// under with-replacement sampling.
class SampleIndexSet {
 public:
  SampleIndexSet(std::vector<Index> indices, SampleMode mode, Index ambient_dim)
      : indices_(std::move(indices)), mode_(mode), n_(ambient_dim) {
    if (n_ < 1) {
      throw InvalidSize("SampleIndexSet: ambient dimension must be positive");
    }
    if (indices_.empty()) {
      throw InvalidSize("SampleIndexSet: index set must be nonempty");
    }
    for (Index i : indices_) {
      if (i < 0 || i >= n_) {
        throw InvalidSize("SampleIndexSet: index " + std::to_string(i) +
                          " out of range [0, " + std::to_string(n_) + ")");
      }
    }
    if (mode_ == SampleMode::without_replacement) {
      if (size() > n_) {
        throw InvalidSize(
            "SampleIndexSet: more indices than ambient dimension "
            "under without-replacement sampling");
      }
      std::vector<Index> sorted = indices_;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidSize(
            "SampleIndexSet: duplicate index under without-replacement "
            "sampling");
      }
    }
  }

  Index size() const { return static_cast<Index>(indices_.size()); }
  Index ambient_dim() const { return n_; }
  SampleMode mode() const { return mode_; }
  const std::vector<Index>& indices() const { return indices_; }

 private:
  std::vector<Index> indices_;
  SampleMode mode_;
  Index n_;
};

// An n x r matrix with orthonormal columns spanning an r-dimensional
// subspace of R^n.
class SubspaceBasis {
 public:
  // Wraps a matrix that is already orthonormal to kOrthoTolerance.
  static SubspaceBasis from_orthonormal(Matrix u) {
    check_shape(u);
    const Index r = u.cols();
    double dev = (u.transpose() * u - Matrix::Identity(r, r))
                     .cwiseAbs()
                     .maxCoeff();
    if (dev > kOrthoTolerance) {
      throw InvalidParameter(
          "SubspaceBasis: columns are not orthonormal (deviation " +
          std::to_string(dev) + ")");
    }
    return SubspaceBasis(std::move(u));
  }

  // Orthonormal basis of the column space of `raw`, which must have full
  // column rank at the kRankTolerance cutoff. Input that is already
  // orthonormal is returned unchanged.
  static SubspaceBasis orthonormalize(const Matrix& raw) {
    check_shape(raw);
    {
      const Index r = raw.cols();
      const double dev = (raw.transpose() * raw - Matrix::Identity(r, r))
                             .cwiseAbs()
                             .maxCoeff();
      if (dev <= kOrthoTolerance) {
        return SubspaceBasis(raw);
      }
    }
    Eigen::BDCSVD<Matrix> svd(raw, Eigen::ComputeThinU);
    const auto& sigma = svd.singularValues();
    const double cutoff = kRankTolerance * sigma(0);
    if (sigma(0) == 0.0 || sigma(sigma.size() - 1) <= cutoff) {
      throw RankDeficient("orthonormalize: input has numerical rank below " +
                          std::to_string(raw.cols()));
    }
    return SubspaceBasis(svd.matrixU());
  }

  Index ambient_dim() const { return u_.rows(); }
  Index dim() const { return u_.cols(); }
  const Matrix& matrix() const { return u_; }

 private:
  explicit SubspaceBasis(Matrix u) : u_(std::move(u)) {}

  static void check_shape(const Matrix& u) {
    if (u.rows() < 1 || u.cols() < 1 || u.cols() > u.rows()) {
      throw InvalidParameter("SubspaceBasis: need 1 <= r <= n, got n=" +
                             std::to_string(u.rows()) +
                             " r=" + std::to_string(u.cols()));
    }
    if (!u.allFinite()) {
      throw InvalidParameter("SubspaceBasis: entries must be finite");
    }
  }

  Matrix u_;
};

// The m x r matrix of basis rows selected by an index set, in the set's
// order; duplicate indices produce duplicate rows.
class RestrictedBasis {
 public:
  RestrictedBasis(Matrix rows, Index ambient_dim)
      : rows_(std::move(rows)), n_(ambient_dim) {}

  Index sample_size() const { return rows_.rows(); }
  Index dim() const { return rows_.cols(); }
  Index ambient_dim() const { return n_; }
  const Matrix& matrix() const { return rows_; }

 private:
  Matrix rows_;
  Index n_;
};

inline RestrictedBasis restrict_basis(const SubspaceBasis& basis,
                                      const SampleIndexSet& omega) {
  if (omega.ambient_dim() != basis.ambient_dim()) {
    throw DimensionMismatch("restrict_basis: index set is over dimension " +
                            std::to_string(omega.ambient_dim()) +
                            " but basis has n=" +
                            std::to_string(basis.ambient_dim()));
  }
  Matrix rows(omega.size(), basis.dim());
  for (Index i = 0; i < omega.size(); ++i) {
    rows.row(i) = basis.matrix().row(omega.indices()[static_cast<size_t>(i)]);
  }
  return RestrictedBasis(std::move(rows), basis.ambient_dim());
}

inline Vector restrict_vector(const Vector& v, const SampleIndexSet& omega) {
  if (omega.ambient_dim() != v.size()) {
    throw DimensionMismatch("restrict_vector: index set is over dimension " +
                            std::to_string(omega.ambient_dim()) +
                            " but vector has length " +
                            std::to_string(v.size()));
  }
  Vector out(omega.size());
  for (Index i = 0; i < omega.size(); ++i) {
    out(i) = v(omega.indices()[static_cast<size_t>(i)]);
  }
  return out;
}

// P_S v = U (U^T v); U is orthonormal, so no normal matrix is formed.
inline Vector project_full(const SubspaceBasis& basis, const Vector& v) {
  if (v.size() != basis.ambient_dim()) {
    throw DimensionMismatch("project_full: vector length " +
                            std::to_string(v.size()) + " does not match n=" +
                            std::to_string(basis.ambient_dim()));
  }
  return basis.matrix() * (basis.matrix().transpose() * v);
}

// Least-squares fit of v_omega against the restricted basis, plus the
// numerical rank of U_omega.
struct RestrictedFit {
  Vector fitted;
  Index rank;
};

// Solves min_a |v_omega - U_omega a| through a rank-revealing complete
// orthogonal decomposition, which carries pseudoinverse semantics when
// U_omega^T U_omega is singular. The normal equations are never formed.
inline RestrictedFit least_squares_fit(const RestrictedBasis& rb,
                                       const Vector& v_omega) {
  if (v_omega.size() != rb.sample_size()) {
    throw DimensionMismatch("least_squares_fit: vector length " +
                            std::to_string(v_omega.size()) +
                            " does not match m=" +
                            std::to_string(rb.sample_size()));
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(kRankTolerance);
  cod.compute(rb.matrix());
  Vector coeffs = cod.solve(v_omega);
  return RestrictedFit{rb.matrix() * coeffs, cod.rank()};
}

inline Vector project_restricted(const RestrictedBasis& rb,
                                 const Vector& v_omega) {
  return least_squares_fit(rb, v_omega).fitted;
}

// v = x + y with x in S and y in S-perp. y is formed as v - x, so the
// reconstruction x + y loses at most one rounding per entry.
struct Decomposition {
  Vector in_subspace;
  Vector perp;
};

inline Decomposition decompose(const SubspaceBasis& basis, const Vector& v) {
  Vector x = project_full(basis, v);
  return Decomposition{x, v - x};
}

}  // namespace msd
