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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tgt/distill.hpp"

namespace tgt {
namespace {

double entropy(const Vector& p) {
  double h = 0.0;
  for (Index k = 0; k < p.size(); ++k) {
    if (p(k) > 0.0) h -= p(k) * std::log(p(k));
  }
  return h;
}

SampleSet labeled_points(Index d, Index n, Index k, std::uint64_t seed) {
  SampleSet s;
  s.instances = oracle::gaussian(d, n, seed);
  std::mt19937_64 rng(seed + 1);
  s.labels = std::vector<int>(static_cast<std::size_t>(n));
  for (int& y : *s.labels) y = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
  s.provenance.assign(static_cast<std::size_t>(n), Provenance::kOriginal);
  return s;
}

TEST_SUITE("distill") {

TEST_CASE("class loss examples") {
  CHECK(class_loss(Vector::Zero(3), 1, 1.0) == doctest::Approx(std::log(3.0)).epsilon(1e-15));

  Vector margin = Vector::Zero(3);
  margin(2) = 50.0;
  CHECK(class_loss(margin, 2, 1.0) <= 1e-9);

  Vector l(3);
  l << 1.0, 2.0, 3.0;
  const double direct = -std::log(std::exp(1.0) / (std::exp(1.0) + std::exp(2.0) + std::exp(3.0)));
  CHECK(std::abs(class_loss(l, 0, 1.0) - direct) <= 1e-12);

  CHECK_THROWS(class_loss(l, 3, 1.0));
  CHECK_THROWS(class_loss(l, -1, 1.0));
}

TEST_CASE("distill loss examples") {
  const Vector uniform = Vector::Constant(3, 1.0 / 3.0);
  CHECK(distill_loss(Vector::Zero(3), ProbVector{uniform, 1.0}, 1.0) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-15));

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Vector l = oracle::gaussian(4, 1, seed, 3.0);
    const double tau = 0.5 + 0.1 * static_cast<double>(seed % 5);
    // One-hot teacher reduces to the class loss exactly.
    for (int y = 0; y < 4; ++y) {
      const Vector e = Vector::Unit(4, y);
      CHECK(distill_loss(l, ProbVector{e, 1.0}, tau) == class_loss(l, y, tau));
    }
    // A student matching the teacher scores the teacher entropy.
    const Vector p = oracle::softmax(l, tau);
    CHECK(std::abs(distill_loss(l, ProbVector{p, tau}, tau) - entropy(p)) <= 1e-12);
  }
}

TEST_CASE("sum form equals direct cross-entropy") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Vector l = oracle::gaussian(5, 1, seed, 4.0);
    const Vector h = oracle::simplex(5, seed + 7);
    const double direct = oracle::cross_entropy(l, h, 1.0);
    CHECK(std::abs(distill_loss(l, ProbVector{h, 1.0}, 1.0) - direct) <= 1e-10);
  }
}

TEST_CASE("distill loss is at least the teacher entropy") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const Vector l = oracle::gaussian(3, 1, seed, 2.0);
    const Vector h = oracle::simplex(3, seed + 99);
    CHECK(distill_loss(l, ProbVector{h, 1.0}, 1.0) >= entropy(h) - 1e-12);
  }
}

TEST_CASE("empirical risk") {
  const MlpParams f = oracle::random_mlp({4, 6, 3}, Activation::kRelu, 1);
  const SampleSet s = labeled_points(4, 5, 3, 2);

  double hand = 0.0;
  for (Index j = 0; j < 5; ++j) {
    const Vector logits = oracle::forward(f, s.instances.col(j));
    hand -= std::log(oracle::softmax(logits, 1.0)((*s.labels)[static_cast<std::size_t>(j)]));
  }
  const RiskValue r = empirical_risk(f, s, 1.0);
  CHECK(r.value == doctest::Approx(hand / 5.0).epsilon(1e-12));
  CHECK(r.n_terms == 5);
  CHECK(r.kind == RiskKind::kClassification);

  const SampleSet one = s.subset({2});
  CHECK(empirical_risk(f, one, 1.0).value ==
        class_loss(mlp_apply(f, one.instances).col(0), (*one.labels)[0], 1.0));
  CHECK(empirical_risk(f, SampleSet::concat(s, s), 1.0).value == doctest::Approx(r.value).epsilon(1e-15));
  CHECK(empirical_risk(f, s.subset({4, 2, 0, 3, 1}), 1.0).value ==
        doctest::Approx(r.value).epsilon(1e-15));

  SampleSet unlabeled = s;
  unlabeled.labels.reset();
  CHECK_THROWS(empirical_risk(f, unlabeled, 1.0));
}

TEST_CASE("empirical distillation risk") {
  const MlpParams f = oracle::random_mlp({4, 6, 3}, Activation::kRelu, 3);
  const MlpParams h = oracle::random_mlp({4, 8, 3}, Activation::kTanh, 4);
  const SampleSet s = labeled_points(4, 5, 3, 5);
  double hand = 0.0;
  for (Index j = 0; j < 5; ++j) {
    const Vector x = s.instances.col(j);
    hand += oracle::cross_entropy(oracle::forward(f, x), oracle::softmax(oracle::forward(h, x), 0.8), 0.8);
  }
  const RiskValue r = empirical_distill_risk(f, h, s, 0.8);
  CHECK(r.value == doctest::Approx(hand / 5.0).epsilon(1e-12));
  CHECK(r.kind == RiskKind::kDistillation);
  CHECK(r.value <= kLossBound);
  CHECK(empirical_distill_risk(f, h, SampleSet::concat(s, s), 0.8).value ==
        doctest::Approx(r.value).epsilon(1e-15));
  CHECK(empirical_distill_risk(f, h, s.subset({1}), 0.8).value ==
        doctest::Approx(oracle::cross_entropy(oracle::forward(f, s.instances.col(1)),
                                              oracle::softmax(oracle::forward(h, s.instances.col(1)), 0.8), 0.8))
            .epsilon(1e-12));
}

TEST_CASE("loss bound constant") {
  CHECK(kLossBound == doctest::Approx(27.631021115928547));
}

TEST_CASE("misclassification rate") {
  // Constant logits predict class 0, so balanced labels give 2/3 errors.
  MlpParams constant = oracle::random_mlp({4, 3}, Activation::kTanh, 6);
  constant.mutable_layers()[0].weight.setZero();
  constant.mutable_layers()[0].bias.setZero();
  const SampleSet s = labeled_points(4, 10000, 3, 7);
  CHECK(std::abs(misclassification_rate(constant, s) - 2.0 / 3.0) <= 0.02);

  SampleSet single = s.subset({0});
  (*single.labels)[0] = 0;
  CHECK(misclassification_rate(constant, single) == 0.0);
}

TEST_CASE("perfect oracle composition has zero error on noiseless data") {
  TaskConfig c;
  c.ambient_noise = 0.0;
  c.label_temperature = kMinLabelTemperature;
  ManifoldTask task = make_task(c);
  const Tensor w = oracle::gaussian(c.ambient_dim, c.latent_dim, 8);
  task.embed = MlpParams("embed", {Layer{w, Vector::Zero(c.ambient_dim), Activation::kIdentity}});
  const Tensor pinv = w.completeOrthogonalDecomposition().pseudoInverse();
  std::vector<Layer> layers = {Layer{pinv, Vector::Zero(c.latent_dim), Activation::kIdentity}};
  for (const Layer& l : task.label_oracle.layers()) layers.push_back(l);
  const MlpParams perfect("f", layers);
  const SampleSet s = sample_labeled(task, 2000, 9);
  CHECK(misclassification_rate(perfect, s) == 0.0);
}

TEST_CASE("TGT objective") {
  const MlpParams f = oracle::random_mlp({4, 5, 3}, Activation::kRelu, 10);
  const MlpParams h = oracle::random_mlp({4, 7, 3}, Activation::kTanh, 11);
  const SampleSet s = labeled_points(4, 3, 3, 12);
  SampleSet none;
  none.instances = Tensor(4, 0);

  const double base = empirical_risk(f, s, 1.0).value + empirical_distill_risk(f, h, s, 1.0).value;
  const RiskValue empty_tilde = tgt_objective(f, h, s, none, 1.0, TermWeights{});
  CHECK(empty_tilde.value == doctest::Approx(base).epsilon(1e-15));
  CHECK(empty_tilde.kind == RiskKind::kTgtComposite);

  SampleSet same = s;
  same.labels.reset();
  const RiskValue doubled = tgt_objective(f, h, s, same, 1.0, TermWeights{});
  CHECK(doubled.value - base == doctest::Approx(empirical_distill_risk(f, h, s, 1.0).value).epsilon(1e-12));

  // Hand computation with three labeled and three generated points.
  SampleSet gen;
  gen.instances = oracle::gaussian(4, 3, 13);
  gen.provenance.assign(3, Provenance::kTgtRandom);
  double hand = 0.0;
  for (Index j = 0; j < 3; ++j) {
    const Vector x = s.instances.col(j);
    const Vector fl = oracle::forward(f, x);
    hand += oracle::cross_entropy(fl, Vector::Unit(3, (*s.labels)[static_cast<std::size_t>(j)]), 1.0) / 3.0;
    hand += oracle::cross_entropy(fl, oracle::softmax(oracle::forward(h, x), 1.0), 1.0) / 3.0;
    const Vector g = gen.instances.col(j);
    hand += oracle::cross_entropy(oracle::forward(f, g), oracle::softmax(oracle::forward(h, g), 1.0), 1.0) / 3.0;
  }
  CHECK(tgt_objective(f, h, s, gen, 1.0, TermWeights{}).value == doctest::Approx(hand).epsilon(1e-12));

  // The recorded objective reports the same value.
  ObjectiveBatch batch;
  batch.labeled_x = s.instances;
  batch.labels = *s.labels;
  batch.labeled_teacher = softmax_columns(mlp_apply(h, s.instances), 1.0);
  batch.generated_x = gen.instances;
  batch.generated_teacher = softmax_columns(mlp_apply(h, gen.instances), 1.0);
  Tape t;
  const MlpNodes nodes = register_params(t, f);
  const NodeId root = record_tgt_objective(t, f, nodes, batch, 1.0, TermWeights{});
  CHECK(t.scalar(root) == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("term weights scale each term") {
  const MlpParams f = oracle::random_mlp({4, 5, 3}, Activation::kRelu, 14);
  const MlpParams h = oracle::random_mlp({4, 7, 3}, Activation::kTanh, 15);
  const SampleSet s = labeled_points(4, 6, 3, 16);
  SampleSet gen;
  gen.instances = oracle::gaussian(4, 4, 17);
  gen.provenance.assign(4, Provenance::kTgtRandom);
  const double a = empirical_risk(f, s, 1.0).value;
  const double b = empirical_distill_risk(f, h, s, 1.0).value;
  const double c = empirical_distill_risk(f, h, gen, 1.0).value;
  const TermWeights w{0.5, 2.0, 3.0};
  CHECK(tgt_objective(f, h, s, gen, 1.0, w).value ==
        doctest::Approx(0.5 * a + 2.0 * b + 3.0 * c).epsilon(1e-12));
}

}  // TEST_SUITE
}  // namespace
}  // namespace tgt
