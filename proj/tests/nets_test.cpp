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

#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tgt/nets.hpp"

namespace tgt {
namespace {

TEST_SUITE("nets") {

TEST_CASE("zero weights output the bias") {
  MlpParams p = init_params(Architecture::chain({4, 3}, Activation::kTanh), 0, "z");
  p.mutable_layers()[0].weight.setZero();
  p.mutable_layers()[0].bias << 1.5, -2.0, 0.25;
  const Tensor x = oracle::gaussian(4, 6, 1);
  const Tensor out = mlp_apply(p, x);
  for (Index j = 0; j < out.cols(); ++j) CHECK(out.col(j) == p.layers()[0].bias);
}

TEST_CASE("single identity layer is the identity map") {
  const MlpParams p("id", {Layer{Tensor::Identity(5, 5), Vector::Zero(5), Activation::kIdentity}});
  const Tensor x = oracle::gaussian(5, 3, 2);
  CHECK(mlp_apply(p, x) == x);
}

TEST_CASE("two-layer net matches a loop-based evaluation") {
  for (Activation act : {Activation::kTanh, Activation::kRelu}) {
    const MlpParams p = oracle::random_mlp({6, 9, 4}, act, 3);
    const Tensor x = oracle::gaussian(6, 10, 4);
    const Tensor out = mlp_apply(p, x);
    for (Index j = 0; j < x.cols(); ++j) {
      CHECK((out.col(j) - oracle::forward(p, x.col(j))).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("tape and tape-free forward agree exactly") {
  const MlpParams p = oracle::random_mlp({5, 8, 8, 3}, Activation::kRelu, 5);
  const Tensor x = oracle::gaussian(5, 7, 6);
  Tape t;
  const NodeId out = mlp_apply(t, p, t.input(x));
  CHECK(t.value(out) == mlp_apply(p, x));
}

TEST_CASE("input dimension mismatch is an error") {
  const MlpParams p = oracle::random_mlp({5, 3}, Activation::kTanh, 7);
  CHECK_THROWS_AS(mlp_apply(p, Tensor::Zero(4, 2)), ShapeError);
}

TEST_CASE("validate enforces chaining and identity output") {
  CHECK_THROWS_AS(MlpParams("b", {Layer{Tensor::Zero(3, 2), Vector::Zero(3), Activation::kTanh}}),
                  ShapeError);
  CHECK_THROWS_AS(MlpParams("c", {Layer{Tensor::Zero(3, 2), Vector::Zero(3), Activation::kTanh},
                                  Layer{Tensor::Zero(2, 4), Vector::Zero(2), Activation::kIdentity}}),
                  ShapeError);
}

TEST_CASE("softmax examples") {
  const ProbVector u = softmax_probs(Vector::Zero(3), 1.0);
  for (Index k = 0; k < 3; ++k) CHECK(u.probs(k) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  Vector l(3);
  l << 1.0, 2.0, 3.0;
  const ProbVector p = softmax_probs(l, 1.0);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  for (Index k = 0; k < 3; ++k) CHECK(std::abs(p.probs(k) - std::exp(l(k)) / z) <= 1e-12);
  CHECK(p.temperature == 1.0);

  Vector big(2);
  big << 10.0, 60.0;
  const ProbVector q = softmax_probs(big, 1.0);
  CHECK(std::abs(q.probs.sum() - 1.0) <= 1e-9);
  CHECK(q.probs(1) > q.probs(0));
}

TEST_CASE("softmax sums to one and ignores constant shifts") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Vector l = oracle::gaussian(5, 1, seed, 10.0);
    const double tau = 0.2 + static_cast<double>(seed % 7) * 0.4;
    const ProbVector p = softmax_probs(l, tau);
    CHECK(std::abs(p.probs.sum() - 1.0) <= 1e-9);
    CHECK((p.probs.array() >= 0.0).all());
    CHECK(argmax(p.probs) == argmax(l));
    const Vector shifted = (l.array() + 123.0).matrix();
    CHECK((softmax_probs(shifted, tau).probs - p.probs).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("init_params is seeded Glorot uniform") {
  const Architecture arch = Architecture::chain({100, 100}, Activation::kTanh);
  const MlpParams a = init_params(arch, 42, "a");
  CHECK(a == init_params(arch, 42, "a"));
  CHECK_FALSE(a.layers()[0].weight == init_params(arch, 43, "a").layers()[0].weight);

  const Tensor& w = a.layers()[0].weight;
  const double bound = std::sqrt(6.0 / 200.0);
  CHECK(w.cwiseAbs().maxCoeff() <= bound);
  CHECK(a.layers()[0].bias.isZero(0.0));
  // Mean of 10k uniform(-a, a) draws: standard error a / sqrt(3 * 10^4).
  const double se = bound / std::sqrt(3.0 * static_cast<double>(w.size()));
  CHECK(std::abs(w.mean()) <= 3.0 * se);
}

TEST_CASE("architecture bookkeeping") {
  const MlpParams p = init_params(Architecture::chain({16, 64, 64, 3}, Activation::kRelu), 1, "teacher");
  CHECK(p.input_dim() == 16);
  CHECK(p.output_dim() == 3);
  CHECK(p.parameter_count() == 16 * 64 + 64 + 64 * 64 + 64 + 64 * 3 + 3);
  CHECK(p.architecture().dims == std::vector<Index>{16, 64, 64, 3});
}

TEST_CASE("text serialization round-trips bit-exactly") {
  const MlpParams p = oracle::random_mlp({4, 6, 2}, Activation::kTanh, 11, "student");
  std::stringstream ss;
  write_mlp(ss, p);
  std::string header;
  std::istringstream head_in(ss.str());
  std::getline(head_in, header);
  CHECK(header == "student 4,6,2 tanh,identity");
  const MlpParams back = read_mlp(ss);
  CHECK(back == p);
  CHECK(back.name() == "student");

  std::stringstream again;
  write_mlp(again, back);
  std::stringstream first;
  write_mlp(first, p);
  CHECK(again.str() == first.str());
}

TEST_CASE("truncated model text is rejected") {
  const MlpParams p = oracle::random_mlp({3, 2}, Activation::kTanh, 12);
  std::stringstream ss;
  write_mlp(ss, p);
  const std::string text = ss.str();
  std::stringstream cut(text.substr(0, text.size() / 2));
  CHECK_THROWS(read_mlp(cut));
}

}  // TEST_SUITE
}  // namespace
}  // namespace tgt
