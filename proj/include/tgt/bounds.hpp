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

// Estimators for the quantities that appear in the generalization bounds of
// teacher-guided training: generator reconstruction error, Wasserstein-1
// distance between original and generated data, empirical Rademacher
// complexity of the induced loss class, teacher quality, the variance term
// and the importance-weighted risk.

#ifndef TGT_BOUNDS_HPP_
#define TGT_BOUNDS_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tgt/assignment.hpp"
#include "tgt/distill.hpp"
#include "tgt/explore.hpp"
#include "tgt/nets.hpp"
#include "tgt/synth.hpp"

namespace tgt {

struct ReconstructionError {
  double max = 0.0;
  double mean = 0.0;
};

// Euclidean ||Dec(Enc(x)) - x|| over the instances of s.
ReconstructionError reconstruction_eps(const MlpParams& enc,
                                       const MlpParams& dec, const SampleSet& s);

double wasserstein1(const SampleSet& a, const SampleSet& b);

// Empirical Rademacher complexity of a finite function class.
//
// `values` is |G| x n with values(g, i) = g(x_i). Returns the average over
// sign vectors of max_g (1/n) sum_i sigma_i g(x_i). When 2^n <= num_sigma
// every sign vector is enumerated and the result is exact; otherwise
// num_sigma vectors are drawn from `seed`. For a finite draw from an infinite
// class this is a lower estimate of the class complexity.
double empirical_rademacher(const Tensor& values, Index num_sigma,
                            std::uint64_t seed);

// `count` students drawn from `arch` with every weight matrix rescaled so
// sqrt(rows) * max_row_norm <= 1, an upper bound on its spectral norm.
std::vector<MlpParams> unit_norm_student_draws(const Architecture& arch,
                                               Index count, std::uint64_t seed);

// Values of the induced class z -> ld(f(Dec(z)), h(Dec(z))) over `latents`,
// one row per student.
Tensor induced_class_values(const std::vector<MlpParams>& students,
                            const MlpParams& dec, const MlpParams& h,
                            const Tensor& latents, double tau);

// Mean over s of ||D_{Y|X}(z_i) - softmax(h(x_i))||_2, using the stored
// generating latent z_i for the conditional.
double teacher_penalty(const MlpParams& h, const ManifoldTask& task,
                       const SampleSet& s, double tau);

struct DistillGap {
  double lhs = 0.0;       // |mean ld(f, h) - mean ce(f, y)|
  double rhs = 0.0;       // sqrt(K) * B * teacher_penalty
  double rhs_cauchy_schwarz = 0.0;  // mean ||p - h||_2 * ||ce(f, .)||_2
  double standard_error = 0.0;      // of the paired per-sample difference
  double teacher_penalty = 0.0;
  Index n = 0;
};

inline constexpr Index kMinGapSamples = 10000;

// Compares the population distillation risk with the population
// classification risk, both estimated on `big` (labels drawn from the true
// conditionals). Requires at least kMinGapSamples items with latents.
DistillGap distill_gap_check(const MlpParams& f, const MlpParams& h,
                             const ManifoldTask& task, const SampleSet& big,
                             double tau);

struct LipschitzW1 {
  double risk_gap = 0.0;
  double l_hat = 0.0;
  double w1 = 0.0;
};

// risk_gap = |mean g(A) - mean g(B)| for g(x) = ld(f(x), h(x)); l_hat is the
// largest |g(x) - g(x')| / ||x - x'|| over all pairs from A and B (pairs
// closer than 1e-9 skipped); w1 is the optimal matching distance.
LipschitzW1 lipschitz_w1_check(const MlpParams& f, const MlpParams& h,
                               const SampleSet& a, const SampleSet& b,
                               double tau);

// sqrt(var * L / n) + L / n with L = log_m + log(1 / delta) and the unbiased
// sample variance of `losses`.
double variance_term(const Vector& losses, double delta, double log_m);
double variance_term(const MlpParams& f, const MlpParams& h,
                     const SampleSet& generated, double delta, double log_m,
                     double tau);

struct WeightedRisk {
  RiskValue risk;
  double effective_sample_size = 0.0;
  Vector weights;
  Vector losses;
};

// Importance-weighted distillation risk on points generated by random
// exploration with scale sigma, weighting each loss by the latent density
// ratio of its stored code.
WeightedRisk is_weighted_risk(const MlpParams& f, const MlpParams& h,
                              const SampleSet& generated, double sigma,
                              double tau);

// log ld(f(x), h(x)) + latent_logdensity. Returns -infinity when the loss is
// exactly zero.
double var_min_score(const MlpParams& f, const MlpParams& h, const Vector& x,
                     double latent_logdensity, double tau);

// ---- Report ----

struct BoundTerm {
  std::string name;
  double value = 0.0;
  Index n = 0;
};

struct BoundReport {
  std::vector<BoundTerm> terms;
  std::vector<std::pair<std::string, std::string>> config;

  void set(const std::string& name, double value, Index n);
  bool has(const std::string& name) const;
  double value(const std::string& name) const;
  // 16 hex digits of FNV-1a over the config echo.
  std::string config_hash() const;
  // Throws NumericError when a term is negative or not finite.
  void validate() const;
};

// One row per term: `name,value,n,config_hash`.
void write_bound_csv(std::ostream& os, const BoundReport& report);
struct ParsedBounds {
  std::vector<BoundTerm> terms;
  std::string config_hash;
};
ParsedBounds read_bound_csv(std::istream& is);
void write_bound_table(std::ostream& os, const BoundReport& report);

struct BoundConfig {
  Index n = 200;
  Index mc_samples = 50000;
  Index num_sigma = 1000;
  Index class_draws = 64;
  double delta = 0.05;
  double log_m = 5.0;
  ExploreConfig explore;
  std::uint64_t seed = 0;
};

// Evaluates every estimator above on fresh draws from the task.
BoundReport evaluate_bounds(const ManifoldTask& task, const MlpParams& enc,
                            const MlpParams& dec, const MlpParams& h,
                            const MlpParams& f, double tau,
                            const BoundConfig& cfg);

}  // namespace tgt

#endif  // TGT_BOUNDS_HPP_
