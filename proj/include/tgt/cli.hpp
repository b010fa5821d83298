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

// Experiment configuration and the tgtlab command-line verbs.
//
// Config files are flat `key = value` lines with dotted keys; `#` starts a
// comment. Unknown keys are errors.

#ifndef TGT_CLI_HPP_
#define TGT_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tgt/bounds.hpp"
#include "tgt/trainer.hpp"

namespace tgt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  TaskConfig task;

  Index n = 100;            // labeled set size for train-student
  Index test_size = 5000;
  std::filesystem::path labeled_csv;  // empty: sample from the task
  std::filesystem::path test_csv;

  Index generator_pool = 5000;
  TrainConfig generator;
  Index teacher_pool = 20000;
  TrainConfig teacher;
  TrainConfig student;
  // `student.<method>.<field>` overrides, applied on top of `student`.
  std::map<Method, std::vector<std::pair<std::string, std::string>>>
      method_overrides;

  std::vector<Index> n_grid = {50, 100};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::vector<Method> methods = {Method::kOneHot, Method::kDistill,
                                 Method::kTgtRandom, Method::kTgtGradient};

  BoundConfig bounds;

  std::filesystem::path enc_path;  // empty: <out>/enc.mlp
  std::filesystem::path dec_path;
  std::filesystem::path teacher_path;
  std::filesystem::path student_path;  // empty: <out>/student_<method>.mlp

  ExperimentConfig();

  // Student settings for one method, overrides included.
  TrainConfig student_config(Method method) const;
  void validate() const;
};

// Sets one key. Throws ConfigError naming the key on unknown keys or bad
// values.
void apply_setting(ExperimentConfig& cfg, std::string_view key,
                   std::string_view value);
// Applies every `key = value` line of a config file body.
void apply_config_text(ExperimentConfig& cfg, std::string_view text);
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

struct SweepRow {
  Method method = Method::kOneHot;
  Index n = 0;
  std::uint64_t seed = 0;
  double final_test_err = 0.0;
  double final_test_risk = 0.0;
};

// `method,n,seed,final_test_err,final_test_risk`.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& is);

struct SweepSummary {
  Method method = Method::kOneHot;
  Index n = 0;
  Index runs = 0;
  double mean_test_err = 0.0;
  double se_test_err = 0.0;  // across-seed standard error
};

std::vector<SweepSummary> summarize_sweep(const std::vector<SweepRow>& rows);
// `method,n,runs,mean_test_err,se_test_err`.
void write_sweep_summary_csv(std::ostream& os,
                             const std::vector<SweepSummary>& rows);

// Runs |methods| x |n_grid| x |seeds| student trainings on `jobs` threads.
// Rows come back in grid order (method, n, seed) regardless of `jobs`.
// `models.test` is the shared evaluation set.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg,
                                const ManifoldTask& task,
                                const StudentInputs& models, int jobs);

// Entry point of the `tgtlab` binary; args excludes the program name.
// Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace tgt

#endif  // TGT_CLI_HPP_
