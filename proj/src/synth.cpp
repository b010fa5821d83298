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

#include "tgt/synth.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tgt {

namespace {

constexpr Index kEmbedHidden = 32;
constexpr Index kOracleHidden = 16;

// Independent RNG streams per sampler stage, so labeled and unlabeled draws
// with the same seed share instances.
constexpr std::uint64_t kLatentStream = 0;
constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kLabelStream = 2;

}  // namespace

void TaskConfig::validate() const {
  if (latent_dim < 1) throw Error("task.d must be >= 1");
  if (ambient_dim <= latent_dim) throw Error("task.D must exceed task.d");
  if (num_classes < 2) throw Error("task.K must be >= 2");
  if (ambient_noise < 0.0) throw Error("task.sigma_x must be >= 0");
  if (!(label_temperature > 0.0)) {
    throw Error("task.label_temperature must be positive");
  }
  if (class_prior_exponent < 0.0) {
    throw Error("task.class_prior_exponent must be >= 0");
  }
}

ManifoldTask make_task(const TaskConfig& config) {
  config.validate();
  ManifoldTask task;
  task.config = config;
  task.embed = init_params(
      Architecture::chain({config.latent_dim, kEmbedHidden, config.ambient_dim},
                          Activation::kTanh),
      mix_seed(config.seed, 101), "embed");
  task.embed.mutable_layers()[0].weight *= config.embed_gain;
  // Random hidden offsets so the tanh units do not all bend at the origin.
  {
    Rng rng = make_rng(config.seed, 102);
    std::uniform_real_distribution<double> offset(-1.0, 1.0);
    for (Index i = 0; i < kEmbedHidden; ++i) {
      task.embed.mutable_layers()[0].bias(i) = offset(rng);
    }
  }
  task.label_oracle = init_params(
      Architecture::chain({config.latent_dim, kOracleHidden, config.num_classes},
                          Activation::kTanh),
      mix_seed(config.seed, 103), "oracle");
  task.label_oracle.mutable_layers()[0].weight *= config.embed_gain;
  task.label_oracle.mutable_layers()[1].weight *= config.label_gain;
  {
    Rng rng = make_rng(config.seed, 104);
    std::uniform_real_distribution<double> offset(-1.0, 1.0);
    for (Index i = 0; i < kOracleHidden; ++i) {
      task.label_oracle.mutable_layers()[0].bias(i) = offset(rng);
    }
  }
  return task;
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "original";
    case Provenance::kReconstructed: return "reconstructed";
    case Provenance::kTgtRandom: return "tgt-random";
    case Provenance::kTgtGradient: return "tgt-gradient";
  }
  return "original";
}

Provenance parse_provenance(std::string_view name) {
  if (name == "original") return Provenance::kOriginal;
  if (name == "reconstructed") return Provenance::kReconstructed;
  if (name == "tgt-random") return Provenance::kTgtRandom;
  if (name == "tgt-gradient") return Provenance::kTgtGradient;
  throw Error("unknown provenance '" + std::string(name) + "'");
}

void SampleSet::validate() const {
  const Index n = size();
  if (labels && static_cast<Index>(labels->size()) != n) {
    throw Error("sample set: labels length mismatch");
  }
  if (latents && latents->cols() != n) {
    throw Error("sample set: latents length mismatch");
  }
  if (static_cast<Index>(provenance.size()) != n) {
    throw Error("sample set: provenance length mismatch");
  }
}

SampleSet SampleSet::subset(const std::vector<Index>& indices) const {
  SampleSet out;
  const auto m = static_cast<Index>(indices.size());
  out.instances.resize(instances.rows(), m);
  if (labels) out.labels.emplace();
  if (latents) out.latents = Tensor(latents->rows(), m);
  for (Index j = 0; j < m; ++j) {
    const Index i = indices[static_cast<std::size_t>(j)];
    out.instances.col(j) = instances.col(i);
    if (labels) out.labels->push_back((*labels)[static_cast<std::size_t>(i)]);
    if (latents) out.latents->col(j) = latents->col(i);
    out.provenance.push_back(provenance[static_cast<std::size_t>(i)]);
  }
  return out;
}

SampleSet SampleSet::concat(const SampleSet& a, const SampleSet& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.labeled() != b.labeled() || a.has_latents() != b.has_latents() ||
      a.instances.rows() != b.instances.rows()) {
    throw Error("sample set concat: incompatible sets");
  }
  SampleSet out;
  out.instances.resize(a.instances.rows(), a.size() + b.size());
  out.instances << a.instances, b.instances;
  if (a.labeled()) {
    out.labels = *a.labels;
    out.labels->insert(out.labels->end(), b.labels->begin(), b.labels->end());
  }
  if (a.has_latents()) {
    out.latents = Tensor(a.latents->rows(), a.size() + b.size());
    *out.latents << *a.latents, *b.latents;
  }
  out.provenance = a.provenance;
  out.provenance.insert(out.provenance.end(), b.provenance.begin(),
                        b.provenance.end());
  return out;
}

Tensor sample_latents(const ManifoldTask& task, Index n, Rng& rng) {
  const Index d = task.latent_dim();
  const double exponent = task.config.class_prior_exponent;
  if (exponent == 0.0) return standard_normal(d, n, rng);

  // Long-tail prior: accept a draw whose oracle-argmax class is c with
  // probability (c + 1)^-exponent.
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Tensor out(d, n);
  Index filled = 0;
  while (filled < n) {
    const Index block = std::max<Index>(n - filled, 64);
    const Tensor candidates = standard_normal(d, block, rng);
    const Tensor logits = mlp_apply(task.label_oracle, candidates);
    for (Index j = 0; j < block && filled < n; ++j) {
      const auto cls = static_cast<double>(argmax(logits.col(j)));
      if (uniform(rng) < std::pow(cls + 1.0, -exponent)) {
        out.col(filled++) = candidates.col(j);
      }
    }
  }
  return out;
}

namespace {

SampleSet draw(const ManifoldTask& task, Index n, std::uint64_t seed,
               bool with_labels) {
  if (n < 1) throw Error("sampler: n must be >= 1");
  Rng latent_rng = make_rng(seed, kLatentStream);
  Rng noise_rng = make_rng(seed, kNoiseStream);

  SampleSet s;
  s.latents = sample_latents(task, n, latent_rng);
  s.instances = mlp_apply(task.embed, *s.latents);
  if (task.config.ambient_noise > 0.0) {
    s.instances +=
        task.config.ambient_noise * standard_normal(task.ambient_dim(), n, noise_rng);
  }
  s.provenance.assign(static_cast<std::size_t>(n), Provenance::kOriginal);

  if (with_labels) {
    Rng label_rng = make_rng(seed, kLabelStream);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const Tensor probs = true_conditionals(task, *s.latents);
    s.labels.emplace();
    s.labels->reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
      const double u = uniform(label_rng);
      double acc = 0.0;
      Index cls = probs.rows() - 1;
      for (Index k = 0; k < probs.rows(); ++k) {
        acc += probs(k, j);
        if (u < acc) {
          cls = k;
          break;
        }
      }
      s.labels->push_back(static_cast<int>(cls));
    }
  }
  return s;
}

}  // namespace

SampleSet sample_labeled(const ManifoldTask& task, Index n, std::uint64_t seed) {
  return draw(task, n, seed, true);
}

SampleSet sample_unlabeled(const ManifoldTask& task, Index m,
                           std::uint64_t seed) {
  return draw(task, m, seed, false);
}

Tensor true_conditionals(const ManifoldTask& task, const Tensor& latents) {
  if (latents.rows() != task.latent_dim()) {
    throw ShapeError("true_conditional: latent has " +
                     std::to_string(latents.rows()) + " rows, expected " +
                     std::to_string(task.latent_dim()));
  }
  const double t = std::max(task.config.label_temperature, kMinLabelTemperature);
  return softmax_columns(mlp_apply(task.label_oracle, latents), t);
}

ProbVector true_conditional(const ManifoldTask& task, const Vector& z) {
  const double t = std::max(task.config.label_temperature, kMinLabelTemperature);
  return ProbVector{true_conditionals(task, z).col(0), t};
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_sample_csv(std::ostream& os, const SampleSet& s, Index latent_dim) {
  s.validate();
  if (s.has_latents() && s.latents->rows() != latent_dim) {
    throw Error("write_sample_csv: latent_dim disagrees with stored latents");
  }
  os << "provenance,label";
  for (Index k = 0; k < latent_dim; ++k) os << ",z_" << k;
  for (Index k = 0; k < s.instances.rows(); ++k) os << ",x_" << k;
  os << '\n';
  for (Index i = 0; i < s.size(); ++i) {
    os << provenance_name(s.provenance[static_cast<std::size_t>(i)]) << ','
       << (s.labeled() ? (*s.labels)[static_cast<std::size_t>(i)] : -1);
    for (Index k = 0; k < latent_dim; ++k) {
      os << ',';
      if (s.has_latents()) os << fmt((*s.latents)(k, i));
    }
    for (Index k = 0; k < s.instances.rows(); ++k) {
      os << ',' << fmt(s.instances(k, i));
    }
    os << '\n';
  }
}

SampleSet read_sample_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("read_sample_csv: missing header");
  Index latent_dim = 0;
  Index ambient_dim = 0;
  {
    std::stringstream hs(line);
    std::string col;
    int i = 0;
    while (std::getline(hs, col, ',')) {
      if (i == 0 && col != "provenance") throw Error("read_sample_csv: bad header");
      if (i == 1 && col != "label") throw Error("read_sample_csv: bad header");
      if (col.rfind("z_", 0) == 0) ++latent_dim;
      if (col.rfind("x_", 0) == 0) ++ambient_dim;
      ++i;
    }
  }
  std::vector<Provenance> prov;
  std::vector<int> labels;
  std::vector<double> z_vals;
  std::vector<double> x_vals;
  bool any_label = false;
  bool any_latent = false;
  bool missing_latent = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (static_cast<Index>(cells.size()) != 2 + latent_dim + ambient_dim) {
      throw Error("read_sample_csv: wrong column count in '" + line + "'");
    }
    prov.push_back(parse_provenance(cells[0]));
    const int label = std::stoi(cells[1]);
    labels.push_back(label);
    any_label = any_label || label >= 0;
    for (Index k = 0; k < latent_dim; ++k) {
      const std::string& c = cells[static_cast<std::size_t>(2 + k)];
      if (c.empty()) {
        missing_latent = true;
        z_vals.push_back(0.0);
      } else {
        any_latent = true;
        z_vals.push_back(std::stod(c));
      }
    }
    for (Index k = 0; k < ambient_dim; ++k) {
      x_vals.push_back(std::stod(cells[static_cast<std::size_t>(2 + latent_dim + k)]));
    }
  }
  if (any_latent && missing_latent) {
    throw Error("read_sample_csv: latents present on some rows only");
  }
  const auto n = static_cast<Index>(prov.size());
  SampleSet s;
  s.instances = Eigen::Map<Tensor>(x_vals.data(), ambient_dim, n);
  if (any_latent) s.latents = Eigen::Map<Tensor>(z_vals.data(), latent_dim, n);
  if (any_label) {
    for (int l : labels) {
      if (l < 0) throw Error("read_sample_csv: mixed labeled/unlabeled rows");
    }
    s.labels = std::move(labels);
  }
  s.provenance = std::move(prov);
  return s;
}

void save_sample_csv(const std::filesystem::path& path, const SampleSet& s,
                     Index latent_dim) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  write_sample_csv(os, s, latent_dim);
}

SampleSet load_sample_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  return read_sample_csv(is);
}

}  // namespace tgt
