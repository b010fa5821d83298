// Copyright 2026 The tgtlab Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exact linear assignment by shortest augmenting paths with dual potentials
// (the O(n^3) Hungarian method).

#ifndef TGT_ASSIGNMENT_HPP_
#define TGT_ASSIGNMENT_HPP_

#include <limits>
#include <vector>

#include "tgt/common.hpp"

namespace tgt {

template <typename Scalar>
struct Assignment {
  // row i is matched to column col_of_row[i].
  std::vector<Index> col_of_row;
  Scalar cost = Scalar(0);
};

// Minimum-cost perfect matching on a square cost matrix.
template <typename Derived>
Assignment<typename Derived::Scalar> solve_assignment(
    const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  const Index n = cost.rows();
  if (cost.cols() != n) {
    throw ShapeError("solve_assignment: cost matrix must be square, got " +
                     std::to_string(cost.rows()) + "x" +
                     std::to_string(cost.cols()));
  }
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  // 1-based potentials; column 0 is a virtual source.
  std::vector<Scalar> u(static_cast<std::size_t>(n + 1), Scalar(0));
  std::vector<Scalar> v(static_cast<std::size_t>(n + 1), Scalar(0));
  std::vector<Index> row_of_col(static_cast<std::size_t>(n + 1), 0);
  std::vector<Index> way(static_cast<std::size_t>(n + 1), 0);

  for (Index i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    Index j0 = 0;
    std::vector<Scalar> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const Index i0 = row_of_col[static_cast<std::size_t>(j0)];
      Scalar delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) continue;
        const Scalar reduced = cost(i0 - 1, j - 1) -
                               u[static_cast<std::size_t>(i0)] - v[uj];
        if (reduced < minv[uj]) {
          minv[uj] = reduced;
          way[uj] = j0;
        }
        if (minv[uj] < delta) {
          delta = minv[uj];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) {
          u[static_cast<std::size_t>(row_of_col[uj])] += delta;
          v[uj] -= delta;
        } else {
          minv[uj] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      row_of_col[static_cast<std::size_t>(j0)] =
          row_of_col[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment<Scalar> result;
  result.col_of_row.assign(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) {
    result.col_of_row[static_cast<std::size_t>(row_of_col[static_cast<std::size_t>(j)] - 1)] =
        j - 1;
  }
  for (Index i = 0; i < n; ++i) {
    result.cost += cost(i, result.col_of_row[static_cast<std::size_t>(i)]);
  }
  return result;
}

// Pairwise Euclidean distances between the columns of a and b.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
pairwise_distances(const Eigen::MatrixBase<DerivedA>& a,
                   const Eigen::MatrixBase<DerivedB>& b) {
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> d(
      a.cols(), b.cols());
  for (Index i = 0; i < a.cols(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) d(i, j) = (a.col(i) - b.col(j)).norm();
  }
  return d;
}

// Wasserstein-1 distance between two equal-size empirical distributions with
// Euclidean ground cost: the mean cost of the optimal perfect matching.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar wasserstein1(const Eigen::MatrixBase<DerivedA>& a,
                                       const Eigen::MatrixBase<DerivedB>& b) {
  if (a.cols() != b.cols() || a.cols() < 1) {
    throw ShapeError("wasserstein1: sets must be equal-size and nonempty, got " +
                     std::to_string(a.cols()) + " and " +
                     std::to_string(b.cols()));
  }
  if (a.rows() != b.rows()) {
    throw ShapeError("wasserstein1: dimension mismatch " +
                     std::to_string(a.rows()) + " vs " + std::to_string(b.rows()));
  }
  return solve_assignment(pairwise_distances(a, b)).cost /
         static_cast<typename DerivedA::Scalar>(a.cols());
}

}  // namespace tgt

#endif  // TGT_ASSIGNMENT_HPP_
