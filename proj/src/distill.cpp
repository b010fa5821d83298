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

#include "tgt/distill.hpp"

namespace tgt {

std::string_view risk_kind_name(RiskKind kind) {
  switch (kind) {
    case RiskKind::kClassification: return "classification";
    case RiskKind::kDistillation: return "distillation";
    case RiskKind::kTgtComposite: return "tgt-composite";
  }
  return "classification";
}

namespace {

void check_label(int label, Index num_classes) {
  if (label < 0 || label >= num_classes) {
    throw Error("label " + std::to_string(label) + " out of range [0, " +
                std::to_string(num_classes) + ")");
  }
}

// Clamped -log of softmax probabilities, column-wise.
Tensor neg_log_probs(const Tensor& logits, double tau) {
  return -softmax_columns(logits, tau).array().max(kLogFloor).log().matrix();
}

}  // namespace

Tensor one_hot(std::span<const int> labels, Index num_classes) {
  Tensor out = Tensor::Zero(num_classes, static_cast<Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j) {
    check_label(labels[j], num_classes);
    out(labels[j], static_cast<Index>(j)) = 1.0;
  }
  return out;
}

NodeId record_distill_loss(Tape& tape, NodeId logits, NodeId targets,
                           double tau) {
  const Tensor& l = tape.value(logits);
  const Tensor& t = tape.value(targets);
  if (l.rows() != t.rows() || l.cols() != t.cols()) {
    throw ShapeError("distill_loss: logits " + shape_string(l) + " vs targets " +
                     shape_string(t));
  }
  const auto batch = static_cast<double>(l.cols());
  const NodeId log_p = tape.log(tape.softmax(logits, tau));
  const NodeId total = tape.sum(tape.mul(targets, log_p));
  return tape.scale(total, -1.0 / batch);
}

NodeId record_distill_loss(Tape& tape, NodeId logits, const Tensor& targets,
                           double tau) {
  return record_distill_loss(tape, logits, tape.input(targets), tau);
}

NodeId record_class_loss(Tape& tape, NodeId logits, std::span<const int> labels,
                         double tau) {
  return record_distill_loss(tape, logits,
                             one_hot(labels, tape.value(logits).rows()), tau);
}

Vector class_losses(const Tensor& logits, std::span<const int> labels,
                    double tau) {
  if (static_cast<Index>(labels.size()) != logits.cols()) {
    throw ShapeError("class_loss: " + std::to_string(labels.size()) +
                     " labels for logits " + shape_string(logits));
  }
  const Tensor nlp = neg_log_probs(logits, tau);
  Vector out(logits.cols());
  for (Index j = 0; j < logits.cols(); ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    check_label(y, logits.rows());
    out(j) = nlp(y, j);
  }
  return out;
}

Vector distill_losses(const Tensor& logits, const Tensor& teacher_probs,
                      double tau) {
  if (logits.rows() != teacher_probs.rows() ||
      logits.cols() != teacher_probs.cols()) {
    throw ShapeError("distill_loss: logits " + shape_string(logits) +
                     " vs teacher " + shape_string(teacher_probs));
  }
  const Tensor nlp = neg_log_probs(logits, tau);
  Vector out(logits.cols());
  for (Index j = 0; j < logits.cols(); ++j) {
    double acc = 0.0;
    for (Index k = 0; k < logits.rows(); ++k) acc += teacher_probs(k, j) * nlp(k, j);
    out(j) = acc;
  }
  return out;
}

Vector distill_losses(const MlpParams& f, const MlpParams& h, const Tensor& x,
                      double tau) {
  return distill_losses(mlp_apply(f, x), softmax_columns(mlp_apply(h, x), tau),
                        tau);
}

double class_loss(const Vector& logits, int label, double tau) {
  const int labels[] = {label};
  return class_losses(logits, labels, tau)(0);
}

double distill_loss(const Vector& logits, const ProbVector& teacher,
                    double tau) {
  return distill_losses(logits, teacher.probs, tau)(0);
}

RiskValue empirical_risk(const MlpParams& f, const SampleSet& s, double tau) {
  if (!s.labeled()) throw Error("empirical_risk: sample set is unlabeled");
  if (s.empty()) throw Error("empirical_risk: sample set is empty");
  const Vector losses = class_losses(mlp_apply(f, s.instances), *s.labels, tau);
  return RiskValue{losses.mean(), s.size(), RiskKind::kClassification};
}

RiskValue empirical_distill_risk(const MlpParams& f, const MlpParams& h,
                                 const SampleSet& s, double tau) {
  if (s.empty()) throw Error("empirical_distill_risk: sample set is empty");
  const Vector losses = distill_losses(f, h, s.instances, tau);
  return RiskValue{losses.mean(), s.size(), RiskKind::kDistillation};
}

double misclassification_rate(const MlpParams& f, const SampleSet& s) {
  if (!s.labeled()) throw Error("misclassification_rate: sample set is unlabeled");
  if (s.empty()) return 0.0;
  const Tensor logits = mlp_apply(f, s.instances);
  Index wrong = 0;
  for (Index j = 0; j < logits.cols(); ++j) {
    if (argmax(logits.col(j)) != (*s.labels)[static_cast<std::size_t>(j)]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(logits.cols());
}

RiskValue tgt_objective(const MlpParams& f, const MlpParams& h,
                        const SampleSet& labeled, const SampleSet& generated,
                        double tau, const TermWeights& weights) {
  double value = weights.supervised * empirical_risk(f, labeled, tau).value +
                 weights.distill * empirical_distill_risk(f, h, labeled, tau).value;
  if (!generated.empty()) {
    value += weights.generated * empirical_distill_risk(f, h, generated, tau).value;
  }
  return RiskValue{value, labeled.size() + generated.size(),
                   RiskKind::kTgtComposite};
}

NodeId record_tgt_objective(Tape& tape, const MlpParams& f,
                            const MlpNodes& f_nodes, const ObjectiveBatch& batch,
                            double tau, const TermWeights& weights) {
  const NodeId x = tape.input(batch.labeled_x);
  const NodeId logits = mlp_apply(tape, f, f_nodes, x);
  NodeId total = tape.scale(record_class_loss(tape, logits, batch.labels, tau),
                            weights.supervised);
  if (weights.distill != 0.0 && batch.labeled_teacher.size() > 0) {
    total = tape.add(
        total, tape.scale(record_distill_loss(tape, logits, batch.labeled_teacher, tau),
                          weights.distill));
  }
  if (weights.generated != 0.0 && batch.generated_x.cols() > 0) {
    const NodeId gx = tape.input(batch.generated_x);
    const NodeId glogits = mlp_apply(tape, f, f_nodes, gx);
    total = tape.add(
        total,
        tape.scale(record_distill_loss(tape, glogits, batch.generated_teacher, tau),
                   weights.generated));
  }
  return total;
}

}  // namespace tgt
