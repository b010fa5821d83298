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

// Classification loss, distillation loss and the risks built from them.
//
// The classification loss is softmax cross-entropy with the log clamped at
// kLogFloor. The distillation loss is the teacher-weighted sum of
// classification losses, sum_y h_y * loss(f, y), which is the cross-entropy
// between the teacher distribution and the student's softmax.

#ifndef TGT_DISTILL_HPP_
#define TGT_DISTILL_HPP_

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "tgt/autodiff.hpp"
#include "tgt/nets.hpp"
#include "tgt/synth.hpp"

namespace tgt {

// Upper bound on any single loss value implied by the log clamp.
inline const double kLossBound = -std::log(kLogFloor);

enum class RiskKind { kClassification, kDistillation, kTgtComposite };

std::string_view risk_kind_name(RiskKind kind);

struct RiskValue {
  double value = 0.0;
  Index n_terms = 0;
  RiskKind kind = RiskKind::kClassification;
};

// Relative weights of the supervised, labeled-distillation and
// generated-distillation terms.
struct TermWeights {
  double supervised = 1.0;
  double distill = 1.0;
  double generated = 1.0;
};

// One-hot K x n matrix for labels in [0, K).
Tensor one_hot(std::span<const int> labels, Index num_classes);

// ---- Tape-level losses (means over the batch columns) ----

// Mean over columns of sum_y target_y * -log softmax(logits / tau)_y.
// `targets` may itself be a tape node (e.g. a teacher softmax), in which case
// gradients flow into it.
NodeId record_distill_loss(Tape& tape, NodeId logits, NodeId targets,
                           double tau);
NodeId record_distill_loss(Tape& tape, NodeId logits, const Tensor& targets,
                           double tau);
NodeId record_class_loss(Tape& tape, NodeId logits, std::span<const int> labels,
                         double tau);

// ---- Per-example values ----

double class_loss(const Vector& logits, int label, double tau);
double distill_loss(const Vector& logits, const ProbVector& teacher, double tau);

// Column-wise losses for a K x n batch of logits.
Vector class_losses(const Tensor& logits, std::span<const int> labels,
                    double tau);
Vector distill_losses(const Tensor& logits, const Tensor& teacher_probs,
                      double tau);

// Per-example distillation loss of student f against teacher h on x.
Vector distill_losses(const MlpParams& f, const MlpParams& h, const Tensor& x,
                      double tau);

// ---- Risks ----

RiskValue empirical_risk(const MlpParams& f, const SampleSet& s, double tau);
RiskValue empirical_distill_risk(const MlpParams& f, const MlpParams& h,
                                 const SampleSet& s, double tau);
double misclassification_rate(const MlpParams& f, const SampleSet& s);

// Composite objective value:
//   w_sup * mean ce(f(x_i), y_i) + w_kd * mean ld(f(x_i), h(x_i))
//   + w_gen * mean ld(f(x~_j), h(x~_j)),
// the last term dropped when `generated` is empty.
RiskValue tgt_objective(const MlpParams& f, const MlpParams& h,
                        const SampleSet& labeled, const SampleSet& generated,
                        double tau, const TermWeights& weights = {});

// Minibatch inputs to the composite objective with teacher probabilities
// precomputed (the teacher is frozen during student training).
struct ObjectiveBatch {
  Tensor labeled_x;
  std::vector<int> labels;
  Tensor labeled_teacher;    // K x n, empty when the distill term is off
  Tensor generated_x;        // D x m, may have zero columns
  Tensor generated_teacher;  // K x m
};

// Records the composite objective for student f whose parameters are
// registered as `f_nodes`.
NodeId record_tgt_objective(Tape& tape, const MlpParams& f,
                            const MlpNodes& f_nodes, const ObjectiveBatch& batch,
                            double tau, const TermWeights& weights);

}  // namespace tgt

#endif  // TGT_DISTILL_HPP_
