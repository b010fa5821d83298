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

#include <numbers>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tgt/trainer.hpp"

namespace tgt {
namespace {

// Minimizes theta^2 from theta = 1 and returns the trajectory.
std::vector<double> quadratic_run(TrainConfig cfg, double lr, int steps) {
  Tensor theta = Tensor::Constant(1, 1, 1.0);
  OptimizerState state;
  std::vector<double> path;
  for (int s = 0; s < steps; ++s) {
    std::vector<Eigen::Map<Tensor>> views = {Eigen::Map<Tensor>(theta.data(), 1, 1)};
    const std::vector<Tensor> grads = {2.0 * theta};
    optimizer_step(views, grads, state, cfg, lr);
    path.push_back(theta(0, 0));
  }
  return path;
}

struct Pipeline {
  ManifoldTask task = make_task(TaskConfig{});
  MlpParams enc;
  MlpParams dec;
  MlpParams h;
  SampleSet test = sample_labeled(task, 2000, 3);

  Pipeline() {
    TrainConfig g;
    g.optimizer = OptimizerKind::kAdam;
    g.learning_rate = 3e-3;
    g.batch_size = 64;
    g.epochs = 20;
    g.schedule = Schedule::kLinearDecay;
    const GeneratorResult gen = train_generator(task, sample_unlabeled(task, 2000, 1), g);
    enc = gen.enc;
    dec = gen.dec;
    TrainConfig t = g;
    t.batch_size = 128;
    t.epochs = 10;
    h = train_teacher(task, sample_labeled(task, 8000, 2), t).h;
  }

  StudentInputs inputs() const { return StudentInputs{&enc, &dec, &h, &test}; }
};

const Pipeline& pipeline() {
  static const Pipeline p;
  return p;
}

TEST_SUITE("trainer") {

TEST_CASE("enum names round-trip") {
  for (Method m : {Method::kOneHot, Method::kDistill, Method::kTgtRandom, Method::kTgtGradient}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  for (OptimizerKind k : {OptimizerKind::kSgd, OptimizerKind::kSgdMomentum, OptimizerKind::kAdam}) {
    CHECK(parse_optimizer(optimizer_name(k)) == k);
  }
  for (Schedule s : {Schedule::kConstant, Schedule::kCosine, Schedule::kLinearDecay}) {
    CHECK(parse_schedule(schedule_name(s)) == s);
  }
  CHECK(parse_refresh("step") == Refresh::kStep);
  CHECK_THROWS(parse_method("bagging"));
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = 0.0;
  CHECK_THROWS(c.validate());
  c = TrainConfig{};
  c.momentum = 1.0;
  CHECK_THROWS(c.validate());
  c = TrainConfig{};
  c.epochs = -1;
  CHECK_THROWS(c.validate());
}

TEST_CASE("optimizer examples") {
  TrainConfig sgd;
  sgd.optimizer = OptimizerKind::kSgd;
  CHECK(quadratic_run(sgd, 0.1, 1)[0] == doctest::Approx(0.8).epsilon(1e-15));

  Tensor theta = oracle::gaussian(2, 3, 1);
  const Tensor keep = theta;
  OptimizerState state;
  std::vector<Eigen::Map<Tensor>> views = {Eigen::Map<Tensor>(theta.data(), 2, 3)};
  const std::vector<Tensor> zero = {Tensor::Zero(2, 3)};
  optimizer_step(views, zero, state, sgd, 0.1);
  CHECK(theta == keep);

  TrainConfig mom;
  mom.optimizer = OptimizerKind::kSgdMomentum;
  mom.momentum = 0.9;
  const std::vector<double> m = quadratic_run(mom, 0.1, 2);
  // v1 = 2, theta1 = 0.8; v2 = 0.9 * 2 + 1.6 = 3.4, theta2 = 0.8 - 0.34.
  CHECK(m[0] == doctest::Approx(0.8));
  CHECK(m[1] == doctest::Approx(0.46));

  TrainConfig adam;
  adam.optimizer = OptimizerKind::kAdam;
  const std::vector<double> a = quadratic_run(adam, 0.05, 500);
  bool reached = false;
  for (double v : a) reached = reached || std::abs(v) < 1e-3;
  CHECK(reached);
  // The first Adam step moves by the learning rate.
  CHECK(a[0] == doctest::Approx(0.95).epsilon(1e-6));

  const std::vector<Tensor> wrong = {Tensor::Zero(3, 2)};
  CHECK_THROWS_AS(optimizer_step(views, wrong, state, sgd, 0.1), ShapeError);
}

TEST_CASE("learning rate schedules") {
  TrainConfig c;
  c.learning_rate = 0.2;
  c.schedule = Schedule::kConstant;
  CHECK(scheduled_rate(c, 50, 100) == 0.2);
  c.schedule = Schedule::kCosine;
  CHECK(scheduled_rate(c, 0, 100) == doctest::Approx(0.2));
  CHECK(scheduled_rate(c, 50, 100) == doctest::Approx(0.1));
  CHECK(scheduled_rate(c, 100, 100) == doctest::Approx(0.0));
  c.schedule = Schedule::kLinearDecay;
  CHECK(scheduled_rate(c, 25, 100) == doctest::Approx(0.15));
  c.warmup_steps = 10;
  CHECK(scheduled_rate(c, 0, 110) == doctest::Approx(0.02));
  CHECK(scheduled_rate(c, 9, 110) == doctest::Approx(0.2));
  CHECK(scheduled_rate(c, 60, 110) == doctest::Approx(0.1));
}

TEST_CASE("generator training") {
  // A linear autoencoder with d = D can represent the identity.
  const Index dim = 6;
  SampleSet s;
  s.instances = oracle::gaussian(dim, 100, 5);
  s.provenance.assign(100, Provenance::kOriginal);
  const Architecture lin = Architecture::chain({dim, dim}, Activation::kIdentity);
  TrainConfig c;
  c.optimizer = OptimizerKind::kAdam;
  c.learning_rate = 0.01;
  c.batch_size = 0;
  c.epochs = 3000;
  c.schedule = Schedule::kConstant;
  const GeneratorResult r = train_generator(s, lin, lin, c);
  CHECK(r.eps_mean < 1e-3);
  CHECK(r.loss_history.size() == 3001);

  c.epochs = 0;
  const GeneratorResult none = train_generator(s, lin, lin, c);
  CHECK(none.enc == init_params(lin, mix_seed(c.seed, 11), "enc"));
  CHECK(none.dec == init_params(lin, mix_seed(c.seed, 12), "dec"));
}

TEST_CASE("full-batch generator loss is non-increasing") {
  const ManifoldTask task = make_task(TaskConfig{});
  const SampleSet s = sample_unlabeled(task, 200, 6);
  TrainConfig c;
  c.optimizer = OptimizerKind::kSgd;
  c.learning_rate = 0.01;
  c.batch_size = 0;
  c.epochs = 200;
  c.schedule = Schedule::kConstant;
  const GeneratorResult r = train_generator(task, s, c);
  for (std::size_t i = 1; i < r.loss_history.size(); ++i) {
    CHECK(r.loss_history[i] <= r.loss_history[i - 1] + 1e-9);
  }
  CHECK(r.loss_history.back() < r.loss_history.front());
}

TEST_CASE("teacher training") {
  const ManifoldTask task = make_task(TaskConfig{});
  TrainConfig c;
  c.optimizer = OptimizerKind::kAdam;
  c.learning_rate = 3e-3;
  c.batch_size = 128;
  c.epochs = 30;
  c.schedule = Schedule::kLinearDecay;
  const SampleSet pool = sample_labeled(task, 20000, 7);
  const TeacherResult t = train_teacher(task, pool, c);
  CHECK(t.accuracy >= 0.9);
  CHECK(t.teacher_penalty > 0.0);
  CHECK(t.loss_history.size() == 30);

  c.epochs = 0;
  const SampleSet small = pool.subset({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(train_teacher(task, small, c).h == init_params(default_teacher_arch(task), mix_seed(c.seed, 21), "teacher"));
  c.epochs = 2;
  CHECK(train_teacher(task, small, c).h == train_teacher(task, small, c).h);
  SampleSet unlabeled = small;
  unlabeled.labels.reset();
  CHECK_THROWS(train_teacher(task, unlabeled, c));
}

TEST_CASE("student training checks its inputs") {
  const Pipeline& p = pipeline();
  const SampleSet s = sample_labeled(p.task, 50, 10);
  TrainConfig c;
  c.epochs = 2;
  c.method = Method::kDistill;
  CHECK_THROWS(train_student(p.task, s, c, StudentInputs{}));
  c.method = Method::kTgtRandom;
  CHECK_THROWS(train_student(p.task, s, c, StudentInputs{nullptr, nullptr, &p.h, nullptr}));
  c.method = Method::kOneHot;
  CHECK_NOTHROW(train_student(p.task, s, c, StudentInputs{}));

  c.epochs = 0;
  const StudentResult none = train_student(p.task, s, c, p.inputs());
  CHECK(none.history.empty());
  CHECK(none.f == init_params(default_student_arch(p.task), mix_seed(c.seed, 31), "student"));
}

TEST_CASE("student histories are reproducible and record exploration") {
  const Pipeline& p = pipeline();
  const SampleSet s = sample_labeled(p.task, 60, 11);
  for (Method m : {Method::kOneHot, Method::kDistill, Method::kTgtRandom, Method::kTgtGradient}) {
    TrainConfig c;
    c.method = m;
    c.epochs = 5;
    c.seed = 4;
    const StudentResult a = train_student(p.task, s, c, p.inputs());
    const StudentResult b = train_student(p.task, s, c, p.inputs());
    CHECK(a.f == b.f);
    REQUIRE(a.history.size() == 5);
    std::stringstream sa, sb;
    write_history_csv(sa, a.history);
    write_history_csv(sb, b.history);
    CHECK(sa.str() == sb.str());
    const bool tgt = m == Method::kTgtRandom || m == Method::kTgtGradient;
    for (const EpochMetrics& e : a.history) CHECK((e.mean_ld_tilde > 0.0) == tgt);
  }
}

TEST_CASE("per-step refresh also trains") {
  const Pipeline& p = pipeline();
  const SampleSet s = sample_labeled(p.task, 40, 12);
  TrainConfig c;
  c.method = Method::kTgtGradient;
  c.refresh = Refresh::kStep;
  c.epochs = 3;
  const StudentResult r = train_student(p.task, s, c, p.inputs());
  CHECK(r.history.size() == 3);
  for (const EpochMetrics& e : r.history) CHECK(e.mean_ld_tilde > 0.0);
}

TEST_CASE("degenerate exploration reduces to distillation on reconstructions") {
  const Pipeline& p = pipeline();
  const SampleSet s = sample_labeled(p.task, 50, 13);
  TrainConfig c;
  c.epochs = 4;
  c.method = Method::kTgtRandom;
  c.explore.sigma = 0.0;
  const StudentResult random = train_student(p.task, s, c, p.inputs());
  c.method = Method::kTgtGradient;
  c.explore.eta = 0.0;
  const StudentResult gradient = train_student(p.task, s, c, p.inputs());
  CHECK(random.f == gradient.f);

  // The generated term then scores the reconstructions.
  const Tensor recon = mlp_apply_columns(p.dec, mlp_apply_columns(p.enc, s.instances));
  SampleSet rs;
  rs.instances = recon;
  rs.provenance.assign(static_cast<std::size_t>(s.size()), Provenance::kReconstructed);
  ExploreConfig e;
  e.sigma = 0.0;
  const SampleSet tilde = generate_tilde_set(s, p.enc, p.dec, random.f, p.h, e, 1, 1.0);
  CHECK(tgt_objective(random.f, p.h, s, tilde, 1.0, TermWeights{}).value ==
        tgt_objective(random.f, p.h, s, rs, 1.0, TermWeights{}).value);
}

TEST_CASE("full-batch objective gradients match finite differences") {
  const Pipeline& p = pipeline();
  const SampleSet s = sample_labeled(p.task, 12, 14);
  MlpParams f = init_params(default_student_arch(p.task), 15, "f");
  ExploreConfig e;
  SampleSet tilde = generate_tilde_set(s, p.enc, p.dec, f, p.h, e, 16, 1.0);
  for (TermWeights w : {TermWeights{1, 0, 0}, TermWeights{1, 1, 0}, TermWeights{1, 1, 1}}) {
    ObjectiveBatch batch;
    batch.labeled_x = s.instances;
    batch.labels = *s.labels;
    batch.labeled_teacher = softmax_columns(mlp_apply(p.h, s.instances), 1.0);
    batch.generated_x = tilde.instances;
    batch.generated_teacher = softmax_columns(mlp_apply(p.h, tilde.instances), 1.0);
    Tape t;
    const MlpNodes nodes = register_params(t, f);
    const Gradients g = t.backward(record_tgt_objective(t, f, nodes, batch, 1.0, w));
    for (std::size_t li = 0; li < f.layers().size(); ++li) {
      const Tensor fd = oracle::fd_gradient(
          [&](const Tensor& wt) {
            MlpParams probe = f;
            probe.mutable_layers()[li].weight = wt;
            return tgt_objective(probe, p.h, s, w.generated != 0.0 ? tilde : SampleSet{Tensor(16, 0)}, 1.0, w).value;
          },
          f.layers()[li].weight, 1e-5);
      CHECK(oracle::rel_error(g[nodes.weights[li]], fd) <= 1e-4);
    }
  }
}

TEST_CASE("distillation beats one-hot at n = 200") {
  const Pipeline& p = pipeline();
  double onehot = 0.0;
  double distill = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SampleSet s = sample_labeled(p.task, 200, 100 + seed);
    TrainConfig c;
    c.seed = seed;
    c.method = Method::kOneHot;
    onehot += train_student(p.task, s, c, p.inputs()).history.back().test_err;
    c.method = Method::kDistill;
    distill += train_student(p.task, s, c, p.inputs()).history.back().test_err;
  }
  CHECK(distill < onehot);
}

TEST_CASE("history CSV round-trips") {
  std::vector<EpochMetrics> h = {{1, 0.5, 0.6, 0.1, 0.2, 0.0}, {2, 1.0 / 3.0, 0.25, 0.05, 0.125, 0.7}};
  std::stringstream ss;
  write_history_csv(ss, h);
  CHECK(ss.str().rfind("epoch,train_risk,test_risk,train_err,test_err,mean_ld_tilde\n", 0) == 0);
  const std::vector<EpochMetrics> back = read_history_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].epoch == 2);
  CHECK(back[1].train_risk == 1.0 / 3.0);
  CHECK(back[1].mean_ld_tilde == 0.7);
  std::stringstream bad("epoch,risk\n1,2\n");
  CHECK_THROWS(read_history_csv(bad));
}

}  // TEST_SUITE
}  // namespace
}  // namespace tgt
