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

// Optimizers and the training loops for the generator, the teacher labeler
// and the student.

#ifndef TGT_TRAINER_HPP_
#define TGT_TRAINER_HPP_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "tgt/distill.hpp"
#include "tgt/explore.hpp"
#include "tgt/nets.hpp"
#include "tgt/synth.hpp"

namespace tgt {

enum class OptimizerKind { kSgd, kSgdMomentum, kAdam };
enum class Schedule { kConstant, kCosine, kLinearDecay };
enum class Method { kOneHot, kDistill, kTgtRandom, kTgtGradient };
enum class Refresh { kEpoch, kStep };

std::string_view optimizer_name(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view name);
std::string_view schedule_name(Schedule s);
Schedule parse_schedule(std::string_view name);
std::string_view method_name(Method m);
Method parse_method(std::string_view name);
std::string_view refresh_name(Refresh r);
Refresh parse_refresh(std::string_view name);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::kSgdMomentum;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  Index batch_size = 32;  // 0 means full batch
  int epochs = 200;
  int warmup_steps = 0;
  Schedule schedule = Schedule::kCosine;
  std::uint64_t seed = 0;
  Method method = Method::kOneHot;
  ExploreConfig explore;
  TermWeights term_weights;
  Refresh refresh = Refresh::kEpoch;
  double temperature = 1.0;

  void validate() const;
};

// Learning rate at optimizer step `step` (0-based) out of `total_steps`:
// linear warmup, then constant, cosine or linear decay to zero.
double scheduled_rate(const TrainConfig& cfg, long step, long total_steps);

struct OptimizerState {
  std::vector<Tensor> first;   // momentum / Adam first moment
  std::vector<Tensor> second;  // Adam second moment
  long step = 0;
};

// One update of every parameter. `params` and `grads` are parallel.
void optimizer_step(std::span<Eigen::Map<Tensor>> params,
                    std::span<const Tensor> grads, OptimizerState& state,
                    const TrainConfig& cfg, double learning_rate);

// Writable views of every weight and bias, in register_params order.
std::vector<Eigen::Map<Tensor>> parameter_views(MlpParams& params);

// Default architectures for a task.
Architecture default_encoder_arch(const ManifoldTask& task);
Architecture default_decoder_arch(const ManifoldTask& task);
Architecture default_teacher_arch(const ManifoldTask& task);
Architecture default_student_arch(const ManifoldTask& task);

struct GeneratorResult {
  MlpParams enc;
  MlpParams dec;
  // Mean squared reconstruction error on the training set, before training
  // and after every epoch.
  std::vector<double> loss_history;
  double eps_max = 0.0;
  double eps_mean = 0.0;
};

// Minimizes mean ||Dec(Enc(x)) - x||^2 over s.
GeneratorResult train_generator(const SampleSet& s, const Architecture& enc_arch,
                                const Architecture& dec_arch,
                                const TrainConfig& cfg);
GeneratorResult train_generator(const ManifoldTask& task, const SampleSet& s,
                                const TrainConfig& cfg);

struct TeacherResult {
  MlpParams h;
  std::vector<double> loss_history;
  double accuracy = 0.0;         // on a fresh held-out draw
  double teacher_penalty = 0.0;  // on the same draw
};

inline constexpr Index kTeacherHoldout = 5000;

// Cross-entropy training of the labeler on a large labeled pool.
TeacherResult train_teacher(const ManifoldTask& task, const SampleSet& pool,
                            const TrainConfig& cfg, const Architecture& arch);
TeacherResult train_teacher(const ManifoldTask& task, const SampleSet& pool,
                            const TrainConfig& cfg);

struct EpochMetrics {
  int epoch = 0;
  double train_risk = 0.0;
  double test_risk = 0.0;
  double train_err = 0.0;
  double test_err = 0.0;
  double mean_ld_tilde = 0.0;  // mean ld on the freshly generated set
};

// Teacher artifacts a student method may need. Pointers may be null for
// methods that do not use them.
struct StudentInputs {
  const MlpParams* enc = nullptr;
  const MlpParams* dec = nullptr;
  const MlpParams* h = nullptr;
  const SampleSet* test = nullptr;
};

struct StudentResult {
  MlpParams f;
  std::vector<EpochMetrics> history;
};

// Trains a student with cfg.method:
//   onehot       cross-entropy on the labeled set;
//   distill      cross-entropy plus distillation on the labeled set;
//   tgt-random   plus distillation on points from random latent exploration;
//   tgt-gradient plus distillation on points from latent gradient ascent.
// The generated set is rebuilt every epoch (or every step) from the current
// student. Throws when a needed teacher artifact is missing.
StudentResult train_student(const ManifoldTask& task, const SampleSet& labeled,
                            const TrainConfig& cfg, const StudentInputs& inputs,
                            const Architecture& arch);
StudentResult train_student(const ManifoldTask& task, const SampleSet& labeled,
                            const TrainConfig& cfg, const StudentInputs& inputs);

// `epoch,train_risk,test_risk,train_err,test_err,mean_ld_tilde`.
void write_history_csv(std::ostream& os, const std::vector<EpochMetrics>& h);
std::vector<EpochMetrics> read_history_csv(std::istream& is);

}  // namespace tgt

#endif  // TGT_TRAINER_HPP_
