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

#include "tgt/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace tgt {

ReconstructionError reconstruction_eps(const MlpParams& enc,
                                       const MlpParams& dec,
                                       const SampleSet& s) {
  if (s.empty()) throw Error("reconstruction_eps: sample set is empty");
  const Tensor recon = mlp_apply(dec, mlp_apply(enc, s.instances));
  if (recon.rows() != s.instances.rows()) {
    throw ShapeError("reconstruction_eps: decoder output " + shape_string(recon) +
                     " vs instances " + shape_string(s.instances));
  }
  const Vector err = (recon - s.instances).colwise().norm().transpose();
  return ReconstructionError{err.maxCoeff(), err.mean()};
}

double wasserstein1(const SampleSet& a, const SampleSet& b) {
  return wasserstein1(a.instances, b.instances);
}

double empirical_rademacher(const Tensor& values, Index num_sigma,
                            std::uint64_t seed) {
  if (num_sigma < 1) throw Error("empirical_rademacher: num_sigma must be >= 1");
  if (values.rows() < 1) throw Error("empirical_rademacher: empty class");
  const Index n = values.cols();
  if (n < 1) throw Error("empirical_rademacher: empty sample");
  const double inv_n = 1.0 / static_cast<double>(n);

  Vector sigma(n);
  auto sup_correlation = [&]() { return (values * sigma).maxCoeff() * inv_n; };

  const bool exact = n < 62 && (Index{1} << n) <= num_sigma;
  if (exact) {
    const Index total = Index{1} << n;
    double acc = 0.0;
    for (Index mask = 0; mask < total; ++mask) {
      for (Index i = 0; i < n; ++i) sigma(i) = ((mask >> i) & 1) ? 1.0 : -1.0;
      acc += sup_correlation();
    }
    return acc / static_cast<double>(total);
  }

  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(0.5);
  double acc = 0.0;
  for (Index draw = 0; draw < num_sigma; ++draw) {
    for (Index i = 0; i < n; ++i) sigma(i) = coin(rng) ? 1.0 : -1.0;
    acc += sup_correlation();
  }
  return acc / static_cast<double>(num_sigma);
}

std::vector<MlpParams> unit_norm_student_draws(const Architecture& arch,
                                               Index count, std::uint64_t seed) {
  std::vector<MlpParams> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) {
    MlpParams p = init_params(arch, mix_seed(seed, static_cast<std::uint64_t>(k)),
                              "student");
    for (Layer& l : p.mutable_layers()) {
      const double bound = std::sqrt(static_cast<double>(l.weight.rows())) *
                           l.weight.rowwise().norm().maxCoeff();
      if (bound > 1.0) l.weight /= bound;
    }
    out.push_back(std::move(p));
  }
  return out;
}

Tensor induced_class_values(const std::vector<MlpParams>& students,
                            const MlpParams& dec, const MlpParams& h,
                            const Tensor& latents, double tau) {
  const Tensor x = mlp_apply(dec, latents);
  const Tensor h_probs = softmax_columns(mlp_apply(h, x), tau);
  Tensor out(static_cast<Index>(students.size()), latents.cols());
  for (std::size_t k = 0; k < students.size(); ++k) {
    out.row(static_cast<Index>(k)) =
        distill_losses(mlp_apply(students[k], x), h_probs, tau).transpose();
  }
  return out;
}

double teacher_penalty(const MlpParams& h, const ManifoldTask& task,
                       const SampleSet& s, double tau) {
  if (!s.has_latents()) throw Error("teacher_penalty: sample set has no latents");
  if (s.empty()) throw Error("teacher_penalty: sample set is empty");
  const Tensor truth = true_conditionals(task, *s.latents);
  const Tensor h_probs = softmax_columns(mlp_apply(h, s.instances), tau);
  return (truth - h_probs).colwise().norm().mean();
}

DistillGap distill_gap_check(const MlpParams& f, const MlpParams& h,
                             const ManifoldTask& task, const SampleSet& big,
                             double tau) {
  if (big.size() < kMinGapSamples) {
    throw Error("distill_gap_check: need at least " +
                std::to_string(kMinGapSamples) + " samples, got " +
                std::to_string(big.size()));
  }
  if (!big.labeled() || !big.has_latents()) {
    throw Error("distill_gap_check: need labels and latents");
  }
  const Index n = big.size();
  const Index k = task.num_classes();
  const Tensor f_logits = mlp_apply(f, big.instances);
  const Tensor h_probs = softmax_columns(mlp_apply(h, big.instances), tau);
  const Tensor truth = true_conditionals(task, *big.latents);
  // Loss of f against every class: column j holds ce(f(x_j), y) for all y.
  const Tensor all_losses =
      -softmax_columns(f_logits, tau).array().max(kLogFloor).log().matrix();

  const Vector ld = distill_losses(f_logits, h_probs, tau);
  const Vector ce = class_losses(f_logits, *big.labels, tau);
  const Vector diff = ld - ce;
  const Vector gap_norm = (truth - h_probs).colwise().norm().transpose();
  const Vector loss_norm = all_losses.colwise().norm().transpose();

  DistillGap out;
  out.n = n;
  const double mean_diff = diff.mean();
  out.lhs = std::abs(mean_diff);
  const double var = (diff.array() - mean_diff).square().sum() /
                     static_cast<double>(n - 1);
  out.standard_error = std::sqrt(var / static_cast<double>(n));
  out.teacher_penalty = gap_norm.mean();
  out.rhs = std::sqrt(static_cast<double>(k)) * kLossBound * out.teacher_penalty;
  out.rhs_cauchy_schwarz = gap_norm.cwiseProduct(loss_norm).mean();
  return out;
}

LipschitzW1 lipschitz_w1_check(const MlpParams& f, const MlpParams& h,
                               const SampleSet& a, const SampleSet& b,
                               double tau) {
  if (a.size() != b.size()) {
    throw ShapeError("lipschitz_w1_check: sizes " + std::to_string(a.size()) +
                     " and " + std::to_string(b.size()) + " differ");
  }
  const Vector ga = distill_losses(f, h, a.instances, tau);
  const Vector gb = distill_losses(f, h, b.instances, tau);

  LipschitzW1 out;
  out.risk_gap = std::abs(ga.mean() - gb.mean());
  out.w1 = wasserstein1(a.instances, b.instances);

  const Index n = a.size();
  Tensor points(a.instances.rows(), 2 * n);
  points << a.instances, b.instances;
  Vector g(2 * n);
  g << ga, gb;
  for (Index i = 0; i < 2 * n; ++i) {
    for (Index j = i + 1; j < 2 * n; ++j) {
      const double dist = (points.col(i) - points.col(j)).norm();
      if (dist < 1e-9) continue;
      out.l_hat = std::max(out.l_hat, std::abs(g(i) - g(j)) / dist);
    }
  }
  return out;
}

double variance_term(const Vector& losses, double delta, double log_m) {
  const Index n = losses.size();
  if (n < 2) throw Error("variance_term: need at least 2 samples");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("variance_term: delta must be in (0, 1)");
  const double mean = losses.mean();
  const double var =
      (losses.array() - mean).square().sum() / static_cast<double>(n - 1);
  const double log_term = log_m - std::log(delta);
  const auto nd = static_cast<double>(n);
  return std::sqrt(var * log_term / nd) + log_term / nd;
}

double variance_term(const MlpParams& f, const MlpParams& h,
                     const SampleSet& generated, double delta, double log_m,
                     double tau) {
  return variance_term(distill_losses(f, h, generated.instances, tau), delta,
                       log_m);
}

WeightedRisk is_weighted_risk(const MlpParams& f, const MlpParams& h,
                              const SampleSet& generated, double sigma,
                              double tau) {
  if (!generated.has_latents()) throw Error("is_weighted_risk: latents missing");
  if (generated.empty()) throw Error("is_weighted_risk: sample set is empty");
  if (!(sigma > 0.0)) throw Error("is_weighted_risk: sigma must be positive");
  const Tensor& z = *generated.latents;
  WeightedRisk out;
  out.losses = distill_losses(f, h, generated.instances, tau);
  out.weights.resize(z.cols());
  for (Index j = 0; j < z.cols(); ++j) {
    out.weights(j) = latent_density_ratio(z.col(j), z.col(j), sigma);
  }
  const auto n = static_cast<double>(z.cols());
  out.risk = RiskValue{out.weights.cwiseProduct(out.losses).mean(), z.cols(),
                       RiskKind::kDistillation};
  const double wmean = out.weights.mean();
  const double cv2 =
      (out.weights.array() - wmean).square().mean() / (wmean * wmean);
  out.effective_sample_size = n / (1.0 + cv2);
  return out;
}

double var_min_score(const MlpParams& f, const MlpParams& h, const Vector& x,
                     double latent_logdensity, double tau) {
  const double loss = distill_losses(f, h, x, tau)(0);
  // Vectorized exp clamps rather than underflowing, so a certain teacher
  // leaves a residue near the smallest normal double.
  if (loss < 1e-300) {
    return -std::numeric_limits<double>::infinity();
  }
  return std::log(loss) + latent_logdensity;
}

// ---- Report ----

void BoundReport::set(const std::string& name, double value, Index n) {
  for (BoundTerm& t : terms) {
    if (t.name == name) {
      t.value = value;
      t.n = n;
      return;
    }
  }
  terms.push_back(BoundTerm{name, value, n});
}

bool BoundReport::has(const std::string& name) const {
  for (const BoundTerm& t : terms) {
    if (t.name == name) return true;
  }
  return false;
}

double BoundReport::value(const std::string& name) const {
  for (const BoundTerm& t : terms) {
    if (t.name == name) return t.value;
  }
  throw Error("bound report: no term '" + name + "'");
}

std::string BoundReport::config_hash() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&hash](const std::string& s) {
    for (unsigned char c : s) {
      hash ^= c;
      hash *= 0x100000001b3ULL;
    }
  };
  for (const auto& [key, value] : config) {
    feed(key);
    feed("=");
    feed(value);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void BoundReport::validate() const {
  for (const BoundTerm& t : terms) {
    // The Monte Carlo Rademacher estimate is signed; every other term is not.
    const bool signed_term = t.name.rfind("rademacher", 0) == 0;
    if (!std::isfinite(t.value) || (!signed_term && t.value < 0.0)) {
      throw NumericError("bound term '" + t.name + "' is invalid: " +
                         std::to_string(t.value));
    }
  }
}

void write_bound_csv(std::ostream& os, const BoundReport& report) {
  const std::string hash = report.config_hash();
  os << "name,value,n,config_hash\n";
  char buf[40];
  for (const BoundTerm& t : report.terms) {
    std::snprintf(buf, sizeof(buf), "%.17g", t.value);
    os << t.name << ',' << buf << ',' << t.n << ',' << hash << '\n';
  }
}

ParsedBounds read_bound_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "name,value,n,config_hash") {
    throw Error("read_bound_csv: bad header");
  }
  ParsedBounds out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string name, value, n, hash;
    if (!std::getline(ls, name, ',') || !std::getline(ls, value, ',') ||
        !std::getline(ls, n, ',') || !std::getline(ls, hash)) {
      throw Error("read_bound_csv: malformed row '" + line + "'");
    }
    if (!out.config_hash.empty() && out.config_hash != hash) {
      throw Error("read_bound_csv: inconsistent config hash");
    }
    out.config_hash = hash;
    out.terms.push_back(BoundTerm{name, std::stod(value), std::stoll(n)});
  }
  return out;
}

void write_bound_table(std::ostream& os, const BoundReport& report) {
  std::size_t width = 4;
  for (const BoundTerm& t : report.terms) width = std::max(width, t.name.size());
  os << std::left << std::setw(static_cast<int>(width)) << "term" << "  "
     << std::right << std::setw(14) << "value" << "  " << std::setw(8) << "n"
     << '\n';
  os << std::string(width + 26, '-') << '\n';
  for (const BoundTerm& t : report.terms) {
    os << std::left << std::setw(static_cast<int>(width)) << t.name << "  "
       << std::right << std::setw(14) << std::setprecision(6) << t.value << "  "
       << std::setw(8) << t.n << '\n';
  }
  os << "config_hash " << report.config_hash() << '\n';
  for (const auto& [key, value] : report.config) os << "  " << key << " = " << value << '\n';
}

BoundReport evaluate_bounds(const ManifoldTask& task, const MlpParams& enc,
                            const MlpParams& dec, const MlpParams& h,
                            const MlpParams& f, double tau,
                            const BoundConfig& cfg) {
  BoundReport report;
  const SampleSet s = sample_labeled(task, cfg.n, mix_seed(cfg.seed, 1));
  const SampleSet tilde =
      generate_tilde_set(s, enc, dec, f, h, cfg.explore, mix_seed(cfg.seed, 2), tau);
  std::vector<Index> rep;
  for (Index i = 0; i < s.size(); ++i) {
    for (int c = 0; c < cfg.explore.per_example_count; ++c) rep.push_back(i);
  }
  const SampleSet s_rep = s.subset(rep);
  const Index m = tilde.size();

  const ReconstructionError eps = reconstruction_eps(enc, dec, s);
  report.set("eps_recon_max", eps.max, s.size());
  report.set("eps_recon_mean", eps.mean, s.size());

  const LipschitzW1 lw = lipschitz_w1_check(f, h, s_rep, tilde, tau);
  report.set("w1", lw.w1, m);
  report.set("l_hat", lw.l_hat, 2 * m);
  report.set("risk_gap_original_vs_generated", lw.risk_gap, m);

  const std::vector<MlpParams> students =
      unit_norm_student_draws(f.architecture(), cfg.class_draws, mix_seed(cfg.seed, 3));
  const Tensor values = induced_class_values(students, dec, h, *tilde.latents, tau);
  report.set("rademacher_hat",
             empirical_rademacher(values, cfg.num_sigma, mix_seed(cfg.seed, 4)), m);

  report.set("teacher_penalty", teacher_penalty(h, task, s, tau), s.size());

  const SampleSet big =
      sample_labeled(task, std::max(cfg.mc_samples, kMinGapSamples), mix_seed(cfg.seed, 5));
  const DistillGap gap = distill_gap_check(f, h, task, big, tau);
  report.set("distill_gap_lhs", gap.lhs, gap.n);
  report.set("distill_gap_rhs", gap.rhs, gap.n);
  report.set("distill_gap_rhs_cauchy_schwarz", gap.rhs_cauchy_schwarz, gap.n);
  report.set("distill_gap_se", gap.standard_error, gap.n);

  const double var = variance_term(f, h, tilde, cfg.delta, cfg.log_m, tau);
  report.set("variance_term", var, m);

  const RiskValue ce = empirical_risk(f, s, tau);
  const RiskValue ld_s = empirical_distill_risk(f, h, s, tau);
  const RiskValue ld_tilde = empirical_distill_risk(f, h, tilde, tau);
  const RiskValue composite = tgt_objective(f, h, s, tilde, tau);
  report.set("risk.classification", ce.value, ce.n_terms);
  report.set("risk.distillation", ld_s.value, ld_s.n_terms);
  report.set("risk.distillation_generated", ld_tilde.value, ld_tilde.n_terms);
  report.set("risk.tgt_composite", composite.value, composite.n_terms);
  report.set("misclassification", misclassification_rate(f, s), s.size());

  if (cfg.explore.mode == ExploreMode::kRandom && cfg.explore.sigma > 0.0) {
    const WeightedRisk w = is_weighted_risk(f, h, tilde, cfg.explore.sigma, tau);
    report.set("risk.is_weighted", w.risk.value, m);
    report.set("is_effective_sample_size", w.effective_sample_size, m);
  }
  // Right-hand side of the variance-based bound on the population
  // distillation risk, with the Wasserstein term scaled by l_hat.
  report.set("bound_rhs_variance", ld_tilde.value + var + lw.l_hat * lw.w1, m);

  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  const TaskConfig& tc = task.config;
  report.config = {
      {"task.d", std::to_string(tc.latent_dim)},
      {"task.D", std::to_string(tc.ambient_dim)},
      {"task.K", std::to_string(tc.num_classes)},
      {"task.sigma_x", num(tc.ambient_noise)},
      {"task.label_temperature", num(tc.label_temperature)},
      {"task.class_prior_exponent", num(tc.class_prior_exponent)},
      {"task.embed_gain", num(tc.embed_gain)},
      {"task.label_gain", num(tc.label_gain)},
      {"task.seed", std::to_string(tc.seed)},
      {"bounds.n", std::to_string(cfg.n)},
      {"bounds.mc_samples", std::to_string(cfg.mc_samples)},
      {"bounds.num_sigma", std::to_string(cfg.num_sigma)},
      {"bounds.class_draws", std::to_string(cfg.class_draws)},
      {"bounds.delta", num(cfg.delta)},
      {"bounds.log_m", num(cfg.log_m)},
      {"bounds.seed", std::to_string(cfg.seed)},
      {"explore.mode", std::string(explore_mode_name(cfg.explore.mode))},
      {"explore.sigma", num(cfg.explore.sigma)},
      {"explore.eta", num(cfg.explore.eta)},
      {"explore.steps", std::to_string(cfg.explore.steps)},
      {"explore.per_example_count", std::to_string(cfg.explore.per_example_count)},
      {"explore.pre_jitter", cfg.explore.pre_jitter ? "true" : "false"},
      {"model.tau", num(tau)},
  };
  report.validate();
  return report;
}

}  // namespace tgt
