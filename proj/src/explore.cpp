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

#include "tgt/explore.hpp"

#include "tgt/autodiff.hpp"

namespace tgt {

std::string_view explore_mode_name(ExploreMode mode) {
  return mode == ExploreMode::kRandom ? "random" : "gradient";
}

ExploreMode parse_explore_mode(std::string_view name) {
  if (name == "random") return ExploreMode::kRandom;
  if (name == "gradient") return ExploreMode::kGradient;
  throw Error("unknown explore mode '" + std::string(name) + "'");
}

void ExploreConfig::validate() const {
  if (sigma < 0.0) throw Error("explore.sigma must be >= 0");
  if (eta < 0.0) throw Error("explore.eta must be >= 0");
  if (steps < 0) throw Error("explore.steps must be >= 0");
  if (per_example_count < 1) throw Error("explore.per_example_count must be >= 1");
}

Tensor mlp_apply_columns(const MlpParams& params, const Tensor& x) {
  Tensor out(params.output_dim(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    out.col(j) = mlp_apply(params, Tensor(x.col(j)));
  }
  return out;
}

Explored tgt_random(const Tensor& x, const MlpParams& enc, const MlpParams& dec,
                    double sigma, Rng& rng) {
  if (sigma < 0.0) throw Error("tgt_random: sigma must be >= 0");
  Explored out;
  out.z = mlp_apply_columns(enc, x);
  const Tensor noise = standard_normal(out.z.rows(), out.z.cols(), rng);
  out.z += sigma * noise;
  out.x = mlp_apply_columns(dec, out.z);
  return out;
}

Tensor latent_distill_gradient(const Tensor& z, const MlpParams& dec,
                               const MlpParams& f, const MlpParams& h,
                               double tau, Vector* values) {
  Tape tape;
  const NodeId zn = tape.input(z);
  const NodeId x = mlp_apply(tape, dec, zn);
  const NodeId f_logits = mlp_apply(tape, f, x);
  const NodeId h_probs = tape.softmax(mlp_apply(tape, h, x), tau);
  const NodeId log_p = tape.log(tape.softmax(f_logits, tau));
  // Sum of per-column losses, so each column's gradient is its own.
  const NodeId per_entry = tape.mul(h_probs, log_p);
  const NodeId root = tape.scale(tape.sum(per_entry), -1.0);
  if (values != nullptr) {
    *values = -tape.value(per_entry).colwise().sum().transpose();
  }
  return tape.backward(root)[zn];
}

Explored tgt_gradient(const Tensor& x, const MlpParams& enc,
                      const MlpParams& dec, const MlpParams& f,
                      const MlpParams& h, const ExploreConfig& cfg, double tau,
                      Rng* rng) {
  cfg.validate();
  Explored out;
  out.z = mlp_apply_columns(enc, x);
  if (cfg.pre_jitter && cfg.sigma > 0.0) {
    if (rng == nullptr) throw Error("tgt_gradient: pre_jitter needs an rng");
    out.z += cfg.sigma * standard_normal(out.z.rows(), out.z.cols(), *rng);
  }
  if (cfg.eta > 0.0) {
    for (int step = 0; step < cfg.steps; ++step) {
      out.z += cfg.eta * latent_distill_gradient(out.z, dec, f, h, tau);
    }
  }
  out.x = mlp_apply_columns(dec, out.z);
  return out;
}

SampleSet generate_tilde_set(const SampleSet& s, const MlpParams& enc,
                             const MlpParams& dec, const MlpParams& f,
                             const MlpParams& h, const ExploreConfig& cfg,
                             std::uint64_t seed, double tau) {
  cfg.validate();
  const Index count = cfg.per_example_count;
  Tensor repeated(s.instances.rows(), s.size() * count);
  for (Index i = 0; i < s.size(); ++i) {
    for (Index c = 0; c < count; ++c) repeated.col(i * count + c) = s.instances.col(i);
  }
  Rng rng = make_rng(seed);
  Explored e = cfg.mode == ExploreMode::kRandom
                   ? tgt_random(repeated, enc, dec, cfg.sigma, rng)
                   : tgt_gradient(repeated, enc, dec, f, h, cfg, tau, &rng);
  SampleSet out;
  out.instances = std::move(e.x);
  out.latents = std::move(e.z);
  out.provenance.assign(static_cast<std::size_t>(out.instances.cols()),
                        cfg.mode == ExploreMode::kRandom ? Provenance::kTgtRandom
                                                         : Provenance::kTgtGradient);
  return out;
}

}  // namespace tgt
