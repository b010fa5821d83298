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

#include "tgt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tgt/bounds.hpp"

namespace tgt {

std::string_view optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kSgdMomentum: return "sgd-momentum";
    case OptimizerKind::kAdam: return "adam";
  }
  return "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "sgd-momentum") return OptimizerKind::kSgdMomentum;
  if (name == "adam") return OptimizerKind::kAdam;
  throw Error("unknown optimizer '" + std::string(name) + "'");
}

std::string_view schedule_name(Schedule s) {
  switch (s) {
    case Schedule::kConstant: return "constant";
    case Schedule::kCosine: return "cosine";
    case Schedule::kLinearDecay: return "linear-decay";
  }
  return "constant";
}

Schedule parse_schedule(std::string_view name) {
  if (name == "constant") return Schedule::kConstant;
  if (name == "cosine") return Schedule::kCosine;
  if (name == "linear-decay") return Schedule::kLinearDecay;
  throw Error("unknown schedule '" + std::string(name) + "'");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kOneHot: return "onehot";
    case Method::kDistill: return "distill";
    case Method::kTgtRandom: return "tgt-random";
    case Method::kTgtGradient: return "tgt-gradient";
  }
  return "onehot";
}

Method parse_method(std::string_view name) {
  if (name == "onehot") return Method::kOneHot;
  if (name == "distill") return Method::kDistill;
  if (name == "tgt-random") return Method::kTgtRandom;
  if (name == "tgt-gradient") return Method::kTgtGradient;
  throw Error("unknown method '" + std::string(name) + "'");
}

std::string_view refresh_name(Refresh r) {
  return r == Refresh::kEpoch ? "epoch" : "step";
}

Refresh parse_refresh(std::string_view name) {
  if (name == "epoch") return Refresh::kEpoch;
  if (name == "step") return Refresh::kStep;
  throw Error("unknown refresh '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw Error("momentum must be in [0, 1)");
  if (beta1 < 0.0 || beta1 >= 1.0) throw Error("beta1 must be in [0, 1)");
  if (beta2 < 0.0 || beta2 >= 1.0) throw Error("beta2 must be in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw Error("adam_epsilon must be positive");
  if (batch_size < 0) throw Error("batch_size must be >= 0");
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (warmup_steps < 0) throw Error("warmup_steps must be >= 0");
  if (!(temperature > 0.0)) throw Error("temperature must be positive");
  explore.validate();
}

double scheduled_rate(const TrainConfig& cfg, long step, long total_steps) {
  const double base = cfg.learning_rate;
  if (step < cfg.warmup_steps) {
    return base * static_cast<double>(step + 1) /
           static_cast<double>(cfg.warmup_steps);
  }
  const long span = std::max<long>(1, total_steps - cfg.warmup_steps);
  const double t = std::clamp(
      static_cast<double>(step - cfg.warmup_steps) / static_cast<double>(span),
      0.0, 1.0);
  switch (cfg.schedule) {
    case Schedule::kConstant: return base;
    case Schedule::kCosine: return base * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
    case Schedule::kLinearDecay: return base * (1.0 - t);
  }
  return base;
}

void optimizer_step(std::span<Eigen::Map<Tensor>> params,
                    std::span<const Tensor> grads, OptimizerState& state,
                    const TrainConfig& cfg, double learning_rate) {
  if (params.size() != grads.size()) {
    throw ShapeError("optimizer_step: " + std::to_string(params.size()) +
                     " params vs " + std::to_string(grads.size()) + " grads");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows() != grads[i].rows() || params[i].cols() != grads[i].cols()) {
      throw ShapeError("optimizer_step: param " + std::to_string(i) + " is [" +
                       std::to_string(params[i].rows()) + "x" +
                       std::to_string(params[i].cols()) + "], grad is " +
                       shape_string(grads[i]));
    }
  }
  if (state.first.empty()) {
    for (const Tensor& g : grads) {
      state.first.push_back(Tensor::Zero(g.rows(), g.cols()));
      if (cfg.optimizer == OptimizerKind::kAdam) {
        state.second.push_back(Tensor::Zero(g.rows(), g.cols()));
      }
    }
  }
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& g = grads[i];
    switch (cfg.optimizer) {
      case OptimizerKind::kSgd:
        params[i] -= learning_rate * g;
        break;
      case OptimizerKind::kSgdMomentum:
        state.first[i] = cfg.momentum * state.first[i] + g;
        params[i] -= learning_rate * state.first[i];
        break;
      case OptimizerKind::kAdam: {
        state.first[i] = cfg.beta1 * state.first[i] + (1.0 - cfg.beta1) * g;
        state.second[i] = cfg.beta2 * state.second[i] +
                          (1.0 - cfg.beta2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
        params[i].array() -= learning_rate * (state.first[i].array() / c1) /
                             ((state.second[i].array() / c2).sqrt() + cfg.adam_epsilon);
        break;
      }
    }
  }
}

std::vector<Eigen::Map<Tensor>> parameter_views(MlpParams& params) {
  std::vector<Eigen::Map<Tensor>> views;
  for (Layer& l : params.mutable_layers()) {
    views.emplace_back(l.weight.data(), l.weight.rows(), l.weight.cols());
    views.emplace_back(l.bias.data(), l.bias.size(), 1);
  }
  return views;
}

Architecture default_encoder_arch(const ManifoldTask& task) {
  return Architecture::chain({task.ambient_dim(), 32, task.latent_dim()},
                             Activation::kTanh);
}

Architecture default_decoder_arch(const ManifoldTask& task) {
  return Architecture::chain({task.latent_dim(), 32, task.ambient_dim()},
                             Activation::kTanh);
}

Architecture default_teacher_arch(const ManifoldTask& task) {
  return Architecture::chain({task.ambient_dim(), 64, 64, task.num_classes()},
                             Activation::kRelu);
}

Architecture default_student_arch(const ManifoldTask& task) {
  return Architecture::chain({task.ambient_dim(), 16, task.num_classes()},
                             Activation::kRelu);
}

namespace {

// Minibatch index lists for one epoch, shuffled with `rng`.
std::vector<std::vector<Index>> make_batches(Index n, Index batch_size, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const Index b = batch_size == 0 ? n : std::min(batch_size, n);
  std::vector<std::vector<Index>> batches;
  for (Index start = 0; start < n; start += b) {
    const Index end = std::min(n, start + b);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

Tensor gather_columns(const Tensor& m, const std::vector<Index>& idx) {
  Tensor out(m.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = m.col(idx[j]);
  return out;
}

std::vector<Tensor> collect_grads(const Gradients& grads, const MlpNodes& nodes) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < nodes.weights.size(); ++i) {
    out.push_back(grads[nodes.weights[i]]);
    out.push_back(grads[nodes.biases[i]]);
  }
  return out;
}

long total_steps(Index n, Index batch_size, int epochs) {
  const Index b = batch_size == 0 ? n : std::min(batch_size, n);
  return static_cast<long>((n + b - 1) / b) * epochs;
}

double reconstruction_mse(const MlpParams& enc, const MlpParams& dec,
                          const Tensor& x) {
  const Tensor diff = mlp_apply(dec, mlp_apply(enc, x)) - x;
  return diff.squaredNorm() / static_cast<double>(x.cols());
}

void check_finite(const Tensor& t, const char* what) {
  if (!t.allFinite()) throw NumericError(std::string(what) + ": non-finite value");
}

}  // namespace

GeneratorResult train_generator(const SampleSet& s, const Architecture& enc_arch,
                                const Architecture& dec_arch,
                                const TrainConfig& cfg) {
  cfg.validate();
  if (s.empty()) throw Error("train_generator: empty sample set");
  GeneratorResult out;
  out.enc = init_params(enc_arch, mix_seed(cfg.seed, 11), "enc");
  out.dec = init_params(dec_arch, mix_seed(cfg.seed, 12), "dec");
  Rng rng = make_rng(cfg.seed, 13);
  OptimizerState state;
  const long total = total_steps(s.size(), cfg.batch_size, cfg.epochs);
  long step = 0;

  out.loss_history.push_back(reconstruction_mse(out.enc, out.dec, s.instances));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& batch : make_batches(s.size(), cfg.batch_size, rng)) {
      Tape tape;
      const Tensor xb = gather_columns(s.instances, batch);
      const NodeId x = tape.input(xb);
      MlpNodes enc_nodes, dec_nodes;
      const NodeId z = mlp_apply(tape, out.enc, x, &enc_nodes);
      const NodeId recon = mlp_apply(tape, out.dec, z, &dec_nodes);
      const NodeId diff = tape.sub(recon, x);
      const NodeId loss = tape.scale(tape.sum(tape.mul(diff, diff)),
                                     1.0 / static_cast<double>(batch.size()));
      const Gradients grads = tape.backward(loss);

      std::vector<Tensor> g = collect_grads(grads, enc_nodes);
      std::vector<Tensor> gd = collect_grads(grads, dec_nodes);
      g.insert(g.end(), gd.begin(), gd.end());
      std::vector<Eigen::Map<Tensor>> views = parameter_views(out.enc);
      std::vector<Eigen::Map<Tensor>> dec_views = parameter_views(out.dec);
      views.insert(views.end(), dec_views.begin(), dec_views.end());
      optimizer_step(views, g, state, cfg, scheduled_rate(cfg, step++, total));
    }
    out.loss_history.push_back(reconstruction_mse(out.enc, out.dec, s.instances));
    if (!std::isfinite(out.loss_history.back())) {
      throw NumericError("train_generator: loss diverged");
    }
  }
  const ReconstructionError eps = reconstruction_eps(out.enc, out.dec, s);
  out.eps_max = eps.max;
  out.eps_mean = eps.mean;
  return out;
}

GeneratorResult train_generator(const ManifoldTask& task, const SampleSet& s,
                                const TrainConfig& cfg) {
  return train_generator(s, default_encoder_arch(task), default_decoder_arch(task),
                         cfg);
}

TeacherResult train_teacher(const ManifoldTask& task, const SampleSet& pool,
                            const TrainConfig& cfg, const Architecture& arch) {
  cfg.validate();
  if (!pool.labeled()) throw Error("train_teacher: pool is unlabeled");
  TeacherResult out;
  out.h = init_params(arch, mix_seed(cfg.seed, 21), "teacher");
  Rng rng = make_rng(cfg.seed, 22);
  OptimizerState state;
  const long total = total_steps(pool.size(), cfg.batch_size, cfg.epochs);
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (const auto& batch : make_batches(pool.size(), cfg.batch_size, rng)) {
      std::vector<int> labels;
      for (Index i : batch) labels.push_back((*pool.labels)[static_cast<std::size_t>(i)]);
      Tape tape;
      const NodeId x = tape.input(gather_columns(pool.instances, batch));
      MlpNodes nodes;
      const NodeId logits = mlp_apply(tape, out.h, x, &nodes);
      const NodeId loss = record_class_loss(tape, logits, labels, cfg.temperature);
      epoch_loss += tape.scalar(loss) * static_cast<double>(batch.size());
      const Gradients grads = tape.backward(loss);
      std::vector<Eigen::Map<Tensor>> views = parameter_views(out.h);
      const std::vector<Tensor> g = collect_grads(grads, nodes);
      optimizer_step(views, g, state, cfg, scheduled_rate(cfg, step++, total));
    }
    out.loss_history.push_back(epoch_loss / static_cast<double>(pool.size()));
    if (!std::isfinite(out.loss_history.back())) {
      throw NumericError("train_teacher: loss diverged");
    }
  }
  const SampleSet holdout =
      sample_labeled(task, kTeacherHoldout, mix_seed(cfg.seed, 23));
  out.accuracy = 1.0 - misclassification_rate(out.h, holdout);
  out.teacher_penalty = teacher_penalty(out.h, task, holdout, cfg.temperature);
  return out;
}

TeacherResult train_teacher(const ManifoldTask& task, const SampleSet& pool,
                            const TrainConfig& cfg) {
  return train_teacher(task, pool, cfg, default_teacher_arch(task));
}

StudentResult train_student(const ManifoldTask& task, const SampleSet& labeled,
                            const TrainConfig& cfg, const StudentInputs& inputs,
                            const Architecture& arch) {
  cfg.validate();
  if (!labeled.labeled() || labeled.empty()) {
    throw Error("train_student: need a nonempty labeled set");
  }
  const bool uses_teacher = cfg.method != Method::kOneHot;
  const bool uses_generator =
      cfg.method == Method::kTgtRandom || cfg.method == Method::kTgtGradient;
  if (uses_teacher && inputs.h == nullptr) {
    throw Error(std::string("train_student: method ") +
                std::string(method_name(cfg.method)) + " needs a teacher labeler");
  }
  if (uses_generator && (inputs.enc == nullptr || inputs.dec == nullptr)) {
    throw Error(std::string("train_student: method ") +
                std::string(method_name(cfg.method)) +
                " needs a generator (encoder and decoder)");
  }
  const double tau = cfg.temperature;
  TermWeights weights = cfg.term_weights;
  if (!uses_teacher) weights.distill = 0.0;
  if (!uses_generator) weights.generated = 0.0;

  ExploreConfig explore = cfg.explore;
  if (cfg.method == Method::kTgtRandom) explore.mode = ExploreMode::kRandom;
  if (cfg.method == Method::kTgtGradient) explore.mode = ExploreMode::kGradient;
  const Index count = explore.per_example_count;

  StudentResult out;
  out.f = init_params(arch, mix_seed(cfg.seed, 31), "student");
  if (out.f.input_dim() != task.ambient_dim() ||
      out.f.output_dim() != task.num_classes()) {
    throw ShapeError("train_student: architecture does not match the task");
  }
  Rng rng = make_rng(cfg.seed, 32);
  OptimizerState state;
  const long total = total_steps(labeled.size(), cfg.batch_size, cfg.epochs);
  long step = 0;

  Tensor labeled_teacher;
  if (uses_teacher) {
    labeled_teacher = softmax_columns(mlp_apply(*inputs.h, labeled.instances), tau);
  }

  auto generate = [&](const SampleSet& from, std::uint64_t seed) {
    return generate_tilde_set(from, *inputs.enc, *inputs.dec, out.f, *inputs.h,
                              explore, seed, tau);
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    SampleSet tilde;
    Tensor tilde_teacher;
    double mean_ld_tilde = 0.0;
    if (uses_generator && cfg.refresh == Refresh::kEpoch) {
      tilde = generate(labeled, mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
      tilde_teacher = softmax_columns(mlp_apply(*inputs.h, tilde.instances), tau);
      mean_ld_tilde =
          distill_losses(mlp_apply(out.f, tilde.instances), tilde_teacher, tau).mean();
    }
    double ld_sum = 0.0;
    Index ld_count = 0;

    for (const auto& batch : make_batches(labeled.size(), cfg.batch_size, rng)) {
      ObjectiveBatch ob;
      ob.labeled_x = gather_columns(labeled.instances, batch);
      for (Index i : batch) ob.labels.push_back((*labeled.labels)[static_cast<std::size_t>(i)]);
      if (uses_teacher) ob.labeled_teacher = gather_columns(labeled_teacher, batch);
      if (uses_generator) {
        if (cfg.refresh == Refresh::kEpoch) {
          std::vector<Index> gidx;
          for (Index i : batch) {
            for (Index c = 0; c < count; ++c) gidx.push_back(i * count + c);
          }
          ob.generated_x = gather_columns(tilde.instances, gidx);
          ob.generated_teacher = gather_columns(tilde_teacher, gidx);
        } else {
          const SampleSet fresh = generate(
              labeled.subset(batch), mix_seed(cfg.seed, 1000000 + static_cast<std::uint64_t>(step)));
          ob.generated_x = fresh.instances;
          ob.generated_teacher = softmax_columns(mlp_apply(*inputs.h, fresh.instances), tau);
          const Vector ld = distill_losses(mlp_apply(out.f, ob.generated_x),
                                           ob.generated_teacher, tau);
          ld_sum += ld.sum();
          ld_count += ld.size();
        }
      }
      Tape tape;
      const MlpNodes nodes = register_params(tape, out.f);
      const NodeId loss = record_tgt_objective(tape, out.f, nodes, ob, tau, weights);
      const Gradients grads = tape.backward(loss);
      const std::vector<Tensor> g = collect_grads(grads, nodes);
      for (const Tensor& t : g) check_finite(t, "train_student gradient");
      std::vector<Eigen::Map<Tensor>> views = parameter_views(out.f);
      optimizer_step(views, g, state, cfg, scheduled_rate(cfg, step++, total));
    }
    if (ld_count > 0) mean_ld_tilde = ld_sum / static_cast<double>(ld_count);

    EpochMetrics m;
    m.epoch = epoch + 1;
    m.train_risk = empirical_risk(out.f, labeled, tau).value;
    m.train_err = misclassification_rate(out.f, labeled);
    if (inputs.test != nullptr) {
      m.test_risk = empirical_risk(out.f, *inputs.test, tau).value;
      m.test_err = misclassification_rate(out.f, *inputs.test);
    }
    m.mean_ld_tilde = mean_ld_tilde;
    if (!std::isfinite(m.train_risk) || !std::isfinite(m.test_risk)) {
      throw NumericError("train_student: non-finite risk");
    }
    out.history.push_back(m);
  }
  return out;
}

StudentResult train_student(const ManifoldTask& task, const SampleSet& labeled,
                            const TrainConfig& cfg, const StudentInputs& inputs) {
  return train_student(task, labeled, cfg, inputs, default_student_arch(task));
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_history_csv(std::ostream& os, const std::vector<EpochMetrics>& h) {
  os << "epoch,train_risk,test_risk,train_err,test_err,mean_ld_tilde\n";
  for (const EpochMetrics& m : h) {
    os << m.epoch << ',' << fmt17(m.train_risk) << ',' << fmt17(m.test_risk) << ','
       << fmt17(m.train_err) << ',' << fmt17(m.test_err) << ','
       << fmt17(m.mean_ld_tilde) << '\n';
  }
}

std::vector<EpochMetrics> read_history_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) ||
      line != "epoch,train_risk,test_risk,train_err,test_err,mean_ld_tilde") {
    throw Error("read_history_csv: bad header");
  }
  std::vector<EpochMetrics> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw Error("read_history_csv: bad row '" + line + "'");
    EpochMetrics m;
    m.epoch = std::stoi(cells[0]);
    m.train_risk = std::stod(cells[1]);
    m.test_risk = std::stod(cells[2]);
    m.train_err = std::stod(cells[3]);
    m.test_err = std::stod(cells[4]);
    m.mean_ld_tilde = std::stod(cells[5]);
    out.push_back(m);
  }
  return out;
}

}  // namespace tgt
