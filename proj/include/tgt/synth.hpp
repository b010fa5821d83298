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

// Synthetic manifold classification tasks with known ground truth.
//
// A latent z ~ N(0, I_d) is pushed through a frozen random embedding into
// R^D and optionally jittered by isotropic ambient noise. The label
// distribution is a tempered softmax of a frozen random oracle evaluated at
// the latent, so D_{Y|X} is available in closed form for every draw.

#ifndef TGT_SYNTH_HPP_
#define TGT_SYNTH_HPP_

#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <vector>

#include "tgt/common.hpp"
#include "tgt/nets.hpp"

namespace tgt {

struct TaskConfig {
  Index latent_dim = 2;
  Index ambient_dim = 16;
  Index num_classes = 3;
  double ambient_noise = 0.01;
  double label_temperature = 0.5;
  double class_prior_exponent = 0.0;
  // Scale of the first embedding layer; larger values curve the manifold.
  double embed_gain = 2.0;
  // Scale of the oracle output layer; larger values sharpen the classes.
  double label_gain = 12.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Temperatures below this are clamped when computing conditionals.
inline constexpr double kMinLabelTemperature = 1e-6;

struct ManifoldTask {
  TaskConfig config;
  MlpParams embed;         // d -> 32 tanh -> D
  MlpParams label_oracle;  // d -> 16 tanh -> K

  Index latent_dim() const { return config.latent_dim; }
  Index ambient_dim() const { return config.ambient_dim; }
  Index num_classes() const { return config.num_classes; }
};

ManifoldTask make_task(const TaskConfig& config);

enum class Provenance { kOriginal, kReconstructed, kTgtRandom, kTgtGradient };

std::string_view provenance_name(Provenance p);
Provenance parse_provenance(std::string_view name);

// Column-major collection of instances; column i of `instances` and of
// `latents` describe the same item.
struct SampleSet {
  Tensor instances;                      // D x n
  std::optional<std::vector<int>> labels;
  std::optional<Tensor> latents;         // d x n
  std::vector<Provenance> provenance;

  Index size() const { return instances.cols(); }
  bool empty() const { return size() == 0; }
  bool labeled() const { return labels.has_value(); }
  bool has_latents() const { return latents.has_value(); }

  // Throws when parallel fields disagree in length.
  void validate() const;

  SampleSet subset(const std::vector<Index>& indices) const;
  // Concatenation; both sides must agree on which optional fields exist.
  static SampleSet concat(const SampleSet& a, const SampleSet& b);
};

SampleSet sample_labeled(const ManifoldTask& task, Index n, std::uint64_t seed);
SampleSet sample_unlabeled(const ManifoldTask& task, Index m,
                           std::uint64_t seed);

// Draws latents (with long-tail rejection when configured) and their
// noiseless embeddings. Shared by both samplers.
Tensor sample_latents(const ManifoldTask& task, Index n, Rng& rng);

// softmax(label_oracle(z) / label_temperature) at one latent.
ProbVector true_conditional(const ManifoldTask& task, const Vector& z);
// Batched version; column j is the conditional at latents.col(j).
Tensor true_conditionals(const ManifoldTask& task, const Tensor& latents);

// Log density of N(0, variance * I) at z.
template <typename Derived>
typename Derived::Scalar isotropic_normal_logpdf(
    const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar variance) {
  using Scalar = typename Derived::Scalar;
  const auto d = static_cast<Scalar>(z.size());
  return Scalar(-0.5) * d * std::log(Scalar(2) * std::numbers::pi_v<Scalar> *
                                     variance) -
         z.squaredNorm() / (Scalar(2) * variance);
}

// p_{N(0,I)}(z_perturbed) / p_{N(0,(1+sigma^2) I)}(z_perturbed): the ratio of
// the latent prior to the prior convolved with N(0, sigma^2 I). The original
// latent does not enter the closed form; it is accepted so call sites read
// like the weighting they implement.
template <typename DerivedA, typename DerivedB>
typename DerivedB::Scalar latent_density_ratio(
    const Eigen::MatrixBase<DerivedA>& /*z_original*/,
    const Eigen::MatrixBase<DerivedB>& z_perturbed,
    typename DerivedB::Scalar sigma) {
  using Scalar = typename DerivedB::Scalar;
  if (!(sigma > Scalar(0))) {
    throw Error("latent_density_ratio: sigma must be positive");
  }
  const Scalar spread = Scalar(1) + sigma * sigma;
  return std::exp(isotropic_normal_logpdf(z_perturbed, Scalar(1)) -
                  isotropic_normal_logpdf(z_perturbed, spread));
}

// CSV with header `provenance,label,z_0..z_{d-1},x_0..x_{D-1}`. Labels are -1
// and latent fields empty when absent.
void write_sample_csv(std::ostream& os, const SampleSet& s, Index latent_dim);
SampleSet read_sample_csv(std::istream& is);
void save_sample_csv(const std::filesystem::path& path, const SampleSet& s,
                     Index latent_dim);
SampleSet load_sample_csv(const std::filesystem::path& path);

}  // namespace tgt

#endif  // TGT_SYNTH_HPP_
