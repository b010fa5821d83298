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

// Independent reference computations shared by the unit and acceptance
// tests. Nothing here calls the code it is used to check.

#ifndef TGT_TESTS_ORACLES_HPP_
#define TGT_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "tgt/nets.hpp"

namespace tgt::oracle {

// Central differences of a scalar function of a matrix.
inline Tensor fd_gradient(const std::function<double(const Tensor&)>& fn,
                          const Tensor& at, double step) {
  Tensor g(at.rows(), at.cols());
  Tensor probe = at;
  for (Index j = 0; j < at.cols(); ++j) {
    for (Index i = 0; i < at.rows(); ++i) {
      const double keep = probe(i, j);
      probe(i, j) = keep + step;
      const double up = fn(probe);
      probe(i, j) = keep - step;
      const double down = fn(probe);
      probe(i, j) = keep;
      g(i, j) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

// max |a - b| / max(1, |a|), the same metric grad_check reports.
inline double rel_error(const Tensor& analytic, const Tensor& reference) {
  double worst = 0.0;
  for (Index j = 0; j < analytic.cols(); ++j) {
    for (Index i = 0; i < analytic.rows(); ++i) {
      const double a = analytic(i, j);
      worst = std::max(worst, std::abs(a - reference(i, j)) / std::max(1.0, std::abs(a)));
    }
  }
  return worst;
}

// Mean matching cost minimized over all n! permutations.
inline double brute_force_w1(const Tensor& a, const Tensor& b) {
  const Index n = a.cols();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (Index i = 0; i < n; ++i) cost += (a.col(i) - b.col(perm[static_cast<std::size_t>(i)])).norm();
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

// E_sigma max_g (1/n) sum_i sigma_i g(x_i) by visiting all 2^n sign vectors.
inline double exact_rademacher(const Tensor& values) {
  const Index n = values.cols();
  double total = 0.0;
  const unsigned long long count = 1ULL << n;
  Vector sigma(n);
  for (unsigned long long mask = 0; mask < count; ++mask) {
    for (Index i = 0; i < n; ++i) sigma(i) = ((mask >> i) & 1ULL) ? 1.0 : -1.0;
    total += (values * sigma).maxCoeff() / static_cast<double>(n);
  }
  return total / static_cast<double>(count);
}

// Plain stable softmax of one vector, written out longhand.
inline Vector softmax(const Vector& logits, double tau) {
  const double m = logits.maxCoeff();
  Vector out(logits.size());
  double z = 0.0;
  for (Index k = 0; k < logits.size(); ++k) {
    out(k) = std::exp((logits(k) - m) / tau);
    z += out(k);
  }
  return out / z;
}

// Cross-entropy -sum_y t_y log softmax(logits)_y.
inline double cross_entropy(const Vector& logits, const Vector& target, double tau) {
  const Vector p = softmax(logits, tau);
  double acc = 0.0;
  for (Index k = 0; k < p.size(); ++k) acc -= target(k) * std::log(p(k));
  return acc;
}

// Forward pass written with explicit loops over rows and columns.
inline Vector forward(const MlpParams& params, const Vector& x) {
  Vector h = x;
  for (const Layer& layer : params.layers()) {
    Vector next(layer.weight.rows());
    for (Index r = 0; r < layer.weight.rows(); ++r) {
      double acc = layer.bias(r);
      for (Index c = 0; c < layer.weight.cols(); ++c) acc += layer.weight(r, c) * h(c);
      switch (layer.activation) {
        case Activation::kIdentity: break;
        case Activation::kTanh: acc = std::tanh(acc); break;
        case Activation::kRelu: acc = acc > 0.0 ? acc : 0.0; break;
      }
      next(r) = acc;
    }
    h = next;
  }
  return h;
}

// Glorot-initialized net with nonzero random biases so bias paths are
// exercised.
inline MlpParams random_mlp(const std::vector<Index>& dims, Activation hidden,
                            std::uint64_t seed, const char* name = "net") {
  MlpParams p = init_params(Architecture::chain(dims, hidden), seed, name);
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (Layer& layer : p.mutable_layers()) {
    for (Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = u(rng);
  }
  return p;
}

inline Tensor gaussian(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) t(i, j) = n(rng);
  }
  return t;
}

// Random point of the probability simplex.
inline Vector simplex(Index k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(1.0);
  Vector v(k);
  for (Index i = 0; i < k; ++i) v(i) = e(rng);
  return v / v.sum();
}

}  // namespace tgt::oracle

#endif  // TGT_TESTS_ORACLES_HPP_
