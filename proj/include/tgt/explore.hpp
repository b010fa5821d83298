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

// Generating new training points in the latent space of the teacher
// generator.
//
// Random mode perturbs the code of each point isotropically:
//   x~ = Dec(Enc(x) + nu),  nu ~ N(0, sigma^2 I_d).
// Gradient mode runs a few ascent steps on the student/teacher disagreement:
//   z = Enc(x);  z <- z + eta * grad_z ld(f(Dec(z)), h(Dec(z)));  x~ = Dec(z),
// with the gradient taken through both the student and the teacher branch.
// Every returned point is Dec applied to its stored latent, column by column,
// so re-decoding the latent reproduces the point exactly.

#ifndef TGT_EXPLORE_HPP_
#define TGT_EXPLORE_HPP_

#include <string_view>

#include "tgt/nets.hpp"
#include "tgt/synth.hpp"

namespace tgt {

enum class ExploreMode { kRandom, kGradient };

std::string_view explore_mode_name(ExploreMode mode);
ExploreMode parse_explore_mode(std::string_view name);

struct ExploreConfig {
  ExploreMode mode = ExploreMode::kRandom;
  double sigma = 0.1;
  double eta = 0.01;
  int steps = 2;
  int per_example_count = 1;
  // Gradient mode only: add N(0, sigma^2 I) to the starting code.
  bool pre_jitter = false;

  void validate() const;
};

struct Explored {
  Tensor x;  // D x n
  Tensor z;  // d x n
};

// Applies the network to each column separately. Used wherever a stored
// latent must reproduce its decoded point bit-for-bit.
Tensor mlp_apply_columns(const MlpParams& params, const Tensor& x);

Explored tgt_random(const Tensor& x, const MlpParams& enc, const MlpParams& dec,
                    double sigma, Rng& rng);

// Gradient of ld(f(Dec(z)), softmax(h(Dec(z)))) with respect to each latent
// column; the loss for column j depends on column j only. `values`, when
// given, receives the per-column losses.
Tensor latent_distill_gradient(const Tensor& z, const MlpParams& dec,
                               const MlpParams& f, const MlpParams& h,
                               double tau, Vector* values = nullptr);

// The ascent loop started from z0 = Enc(x) (optionally jittered with `rng`).
Explored tgt_gradient(const Tensor& x, const MlpParams& enc,
                      const MlpParams& dec, const MlpParams& f,
                      const MlpParams& h, const ExploreConfig& cfg, double tau,
                      Rng* rng = nullptr);

// per_example_count generated points per item of `s`; item i's copies occupy
// output columns [i * count, (i + 1) * count).
SampleSet generate_tilde_set(const SampleSet& s, const MlpParams& enc,
                             const MlpParams& dec, const MlpParams& f,
                             const MlpParams& h, const ExploreConfig& cfg,
                             std::uint64_t seed, double tau);

}  // namespace tgt

#endif  // TGT_EXPLORE_HPP_
