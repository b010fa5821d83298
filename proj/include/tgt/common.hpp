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

// Shared aliases, error types and seeding helpers.

#ifndef TGT_COMMON_HPP_
#define TGT_COMMON_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace tgt {

// Dense real tensor. Batches are stored one sample per column, so a single
// instance x in R^D is a D x 1 matrix.
using Tensor = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when operand shapes do not conform; the message names the op and
// both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Raised when a computation produced NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

std::string shape_string(const Tensor& t);

// SplitMix64 finalizer; used to derive independent stream seeds from
// (seed, index) pairs.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream = 0) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

// Fills a matrix with independent N(0, 1) draws, column by column.
Tensor standard_normal(Index rows, Index cols, Rng& rng);

bool all_finite(const Tensor& t);

// Index of the largest entry; ties go to the smallest index.
template <typename Derived>
Index argmax(const Eigen::MatrixBase<Derived>& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

}  // namespace tgt

#endif  // TGT_COMMON_HPP_
