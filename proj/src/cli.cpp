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

#include "tgt/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "tgt/assignment.hpp"

namespace tgt {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_real(std::string_view v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw Error("expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

long long parse_integer(std::string_view v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw Error("expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t parse_unsigned(std::string_view v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw Error("expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

Index parse_count(std::string_view v) {
  const long long n = parse_integer(v);
  if (n < 0) throw Error("expected a count, got '" + std::string(v) + "'");
  return static_cast<Index>(n);
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("expected true or false, got '" + std::string(v) + "'");
}

bool apply_explore_key(ExploreConfig& e, std::string_view field,
                       std::string_view v) {
  if (field == "mode") e.mode = parse_explore_mode(v);
  else if (field == "sigma") e.sigma = parse_real(v);
  else if (field == "eta") e.eta = parse_real(v);
  else if (field == "steps") e.steps = static_cast<int>(parse_count(v));
  else if (field == "per_example_count") e.per_example_count = static_cast<int>(parse_count(v));
  else if (field == "pre_jitter") e.pre_jitter = parse_bool(v);
  else return false;
  return true;
}

bool apply_train_key(TrainConfig& c, std::string_view field, std::string_view v,
                     bool student) {
  if (field == "optimizer") c.optimizer = parse_optimizer(v);
  else if (field == "learning_rate") c.learning_rate = parse_real(v);
  else if (field == "momentum") c.momentum = parse_real(v);
  else if (field == "beta1") c.beta1 = parse_real(v);
  else if (field == "beta2") c.beta2 = parse_real(v);
  else if (field == "adam_epsilon") c.adam_epsilon = parse_real(v);
  else if (field == "batch_size") c.batch_size = parse_count(v);
  else if (field == "epochs") c.epochs = static_cast<int>(parse_count(v));
  else if (field == "warmup_steps") c.warmup_steps = static_cast<int>(parse_count(v));
  else if (field == "schedule") c.schedule = parse_schedule(v);
  else if (!student) return false;
  else if (field == "method") c.method = parse_method(v);
  else if (field == "refresh") c.refresh = parse_refresh(v);
  else if (field == "temperature") c.temperature = parse_real(v);
  else if (field == "w_sup") c.term_weights.supervised = parse_real(v);
  else if (field == "w_kd") c.term_weights.distill = parse_real(v);
  else if (field == "w_tgt") c.term_weights.generated = parse_real(v);
  else if (field.starts_with("explore.")) {
    return apply_explore_key(c.explore, field.substr(8), v);
  } else {
    return false;
  }
  return true;
}

bool apply_task_key(TaskConfig& t, std::string_view field, std::string_view v) {
  if (field == "d") t.latent_dim = parse_count(v);
  else if (field == "D") t.ambient_dim = parse_count(v);
  else if (field == "K") t.num_classes = parse_count(v);
  else if (field == "sigma_x") t.ambient_noise = parse_real(v);
  else if (field == "label_temperature") t.label_temperature = parse_real(v);
  else if (field == "class_prior_exponent") t.class_prior_exponent = parse_real(v);
  else if (field == "embed_gain") t.embed_gain = parse_real(v);
  else if (field == "label_gain") t.label_gain = parse_real(v);
  else if (field == "seed") t.seed = parse_unsigned(v);
  else return false;
  return true;
}

bool apply_bounds_key(BoundConfig& b, std::string_view field, std::string_view v) {
  if (field == "n") b.n = parse_count(v);
  else if (field == "mc_samples") b.mc_samples = parse_count(v);
  else if (field == "num_sigma") b.num_sigma = parse_count(v);
  else if (field == "class_draws") b.class_draws = parse_count(v);
  else if (field == "delta") b.delta = parse_real(v);
  else if (field == "log_m") b.log_m = parse_real(v);
  else return false;
  return true;
}

// Splits `student.<method>.<rest>`; returns false if the middle part is not a
// method name.
bool split_method_key(std::string_view field, Method& method,
                      std::string_view& rest) {
  const auto dot = field.find('.');
  if (dot == std::string_view::npos) return false;
  try {
    method = parse_method(field.substr(0, dot));
  } catch (const Error&) {
    return false;
  }
  rest = field.substr(dot + 1);
  return true;
}

bool apply_known_key(ExperimentConfig& cfg, std::string_view key,
                     std::string_view v) {
  auto after = [&](std::string_view prefix, std::string_view& rest) {
    if (!key.starts_with(prefix)) return false;
    rest = key.substr(prefix.size());
    return true;
  };
  std::string_view rest;
  if (key == "seed") {
    cfg.seed = parse_unsigned(v);
  } else if (after("task.", rest)) {
    return apply_task_key(cfg.task, rest, v);
  } else if (key == "data.n") {
    cfg.n = parse_count(v);
  } else if (key == "data.test_size") {
    cfg.test_size = parse_count(v);
  } else if (key == "data.labeled_csv") {
    cfg.labeled_csv = std::string(v);
  } else if (key == "data.test_csv") {
    cfg.test_csv = std::string(v);
  } else if (key == "generator.pool") {
    cfg.generator_pool = parse_count(v);
  } else if (after("generator.", rest)) {
    return apply_train_key(cfg.generator, rest, v, false);
  } else if (key == "teacher.pool") {
    cfg.teacher_pool = parse_count(v);
  } else if (after("teacher.", rest)) {
    return apply_train_key(cfg.teacher, rest, v, false);
  } else if (after("student.", rest)) {
    Method m{};
    std::string_view field;
    if (split_method_key(rest, m, field)) {
      TrainConfig probe;
      if (field == "method" || !apply_train_key(probe, field, v, true)) return false;
      cfg.method_overrides[m].emplace_back(std::string(field), std::string(v));
      return true;
    }
    return apply_train_key(cfg.student, rest, v, true);
  } else if (after("explore.", rest)) {
    return apply_explore_key(cfg.student.explore, rest, v);
  } else if (key == "sweep.n_grid") {
    cfg.n_grid.clear();
    for (const auto& item : split(v, ',')) cfg.n_grid.push_back(parse_count(item));
  } else if (key == "sweep.seeds") {
    cfg.seeds.clear();
    for (const auto& item : split(v, ',')) cfg.seeds.push_back(parse_unsigned(item));
  } else if (key == "sweep.methods") {
    cfg.methods.clear();
    for (const auto& item : split(v, ',')) cfg.methods.push_back(parse_method(item));
  } else if (after("bounds.", rest)) {
    return apply_bounds_key(cfg.bounds, rest, v);
  } else if (key == "model.enc") {
    cfg.enc_path = std::string(v);
  } else if (key == "model.dec") {
    cfg.dec_path = std::string(v);
  } else if (key == "model.teacher") {
    cfg.teacher_path = std::string(v);
  } else if (key == "model.student") {
    cfg.student_path = std::string(v);
  } else {
    return false;
  }
  return true;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  generator.optimizer = OptimizerKind::kAdam;
  generator.learning_rate = 1e-3;
  generator.batch_size = 64;
  generator.epochs = 150;
  generator.schedule = Schedule::kLinearDecay;

  teacher.optimizer = OptimizerKind::kAdam;
  teacher.learning_rate = 3e-3;
  teacher.batch_size = 128;
  teacher.epochs = 30;
  teacher.schedule = Schedule::kLinearDecay;
}

TrainConfig ExperimentConfig::student_config(Method method) const {
  TrainConfig c = student;
  c.method = method;
  const auto it = method_overrides.find(method);
  if (it != method_overrides.end()) {
    for (const auto& [field, value] : it->second) {
      apply_train_key(c, field, value, true);
    }
  }
  return c;
}

void ExperimentConfig::validate() const {
  auto check = [](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string(key) + ": " + e.what());
    }
  };
  check("task", [&] { task.validate(); });
  check("generator", [&] { generator.validate(); });
  check("teacher", [&] { teacher.validate(); });
  check("student", [&] { student.validate(); student.explore.validate(); });
  for (const auto& [m, _] : method_overrides) {
    const std::string key = "student." + std::string(method_name(m));
    check(key.c_str(), [&] {
      const TrainConfig c = student_config(m);
      c.validate();
      c.explore.validate();
    });
  }
  if (n < 1) throw ConfigError("data.n: must be >= 1");
  if (test_size < 1) throw ConfigError("data.test_size: must be >= 1");
  if (generator_pool < 1) throw ConfigError("generator.pool: must be >= 1");
  if (n_grid.empty()) throw ConfigError("sweep.n_grid: must not be empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
      throw ConfigError("sweep.n_grid: must be positive and ascending");
    }
  }
  if (seeds.empty()) throw ConfigError("sweep.seeds: must not be empty");
  if (methods.empty()) throw ConfigError("sweep.methods: must not be empty");
  if (teacher_pool < std::max(n, n_grid.back())) {
    throw ConfigError("teacher.pool: must be at least the student set size");
  }
  if (bounds.n < 2) throw ConfigError("bounds.n: must be >= 2");
  if (bounds.num_sigma < 1) throw ConfigError("bounds.num_sigma: must be >= 1");
  if (bounds.class_draws < 1) throw ConfigError("bounds.class_draws: must be >= 1");
  if (!(bounds.delta > 0.0 && bounds.delta < 1.0)) {
    throw ConfigError("bounds.delta: must be in (0, 1)");
  }
}

void apply_setting(ExperimentConfig& cfg, std::string_view key,
                   std::string_view value) {
  bool known = false;
  try {
    known = apply_known_key(cfg, key, value);
  } catch (const std::exception& e) {
    throw ConfigError("invalid value for " + std::string(key) + ": " + e.what());
  }
  if (!known) throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
  int lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_config_file(ExperimentConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "method,n,seed,final_test_err,final_test_risk\n";
  for (const auto& r : rows) {
    os << method_name(r.method) << ',' << r.n << ',' << r.seed << ','
       << fmt(r.final_test_err) << ',' << fmt(r.final_test_risk) << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) ||
      line != "method,n,seed,final_test_err,final_test_risk") {
    throw Error("read_sweep_csv: bad header");
  }
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 5) throw Error("read_sweep_csv: bad row '" + line + "'");
    SweepRow r;
    r.method = parse_method(cells[0]);
    r.n = parse_count(cells[1]);
    r.seed = parse_unsigned(cells[2]);
    r.final_test_err = parse_real(cells[3]);
    r.final_test_risk = parse_real(cells[4]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<SweepSummary> summarize_sweep(const std::vector<SweepRow>& rows) {
  std::vector<SweepSummary> out;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SweepSummary& s) {
      return s.method == r.method && s.n == r.n;
    });
    if (it == out.end()) {
      out.push_back(SweepSummary{r.method, r.n, 0, 0.0, 0.0});
      it = out.end() - 1;
    }
    ++it->runs;
  }
  for (auto& s : out) {
    std::vector<double> errs;
    for (const auto& r : rows) {
      if (r.method == s.method && r.n == s.n) errs.push_back(r.final_test_err);
    }
    const double k = static_cast<double>(errs.size());
    s.mean_test_err = std::accumulate(errs.begin(), errs.end(), 0.0) / k;
    if (errs.size() > 1) {
      double ss = 0.0;
      for (double e : errs) ss += (e - s.mean_test_err) * (e - s.mean_test_err);
      s.se_test_err = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    }
  }
  return out;
}

void write_sweep_summary_csv(std::ostream& os,
                             const std::vector<SweepSummary>& rows) {
  os << "method,n,runs,mean_test_err,se_test_err\n";
  for (const auto& s : rows) {
    os << method_name(s.method) << ',' << s.n << ',' << s.runs << ','
       << fmt(s.mean_test_err) << ',' << fmt(s.se_test_err) << '\n';
  }
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg,
                                const ManifoldTask& task,
                                const StudentInputs& models, int jobs) {
  if (models.test == nullptr) throw Error("run_sweep: no evaluation set");
  struct Job {
    Method method;
    Index n;
    std::uint64_t seed;
  };
  std::vector<Job> grid;
  for (Method m : cfg.methods) {
    for (Index n : cfg.n_grid) {
      for (std::uint64_t s : cfg.seeds) grid.push_back(Job{m, n, s});
    }
  }

  std::vector<SweepRow> rows(grid.size());
  std::vector<std::exception_ptr> failures(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      const Job& job = grid[i];
      try {
        // The labeled set depends on (seed, n) only, so every method sees
        // the same data.
        const std::uint64_t stream =
            mix_seed(mix_seed(cfg.seed, 1000 + job.seed), static_cast<std::uint64_t>(job.n));
        const SampleSet labeled = sample_labeled(task, job.n, stream);
        TrainConfig tc = cfg.student_config(job.method);
        tc.seed = mix_seed(stream, 1);
        const StudentResult r = train_student(task, labeled, tc, models);
        const EpochMetrics last = r.history.empty() ? EpochMetrics{} : r.history.back();
        rows[i] = SweepRow{job.method, job.n, job.seed, last.test_err, last.test_risk};
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(
      jobs > 0 ? static_cast<std::size_t>(jobs) : 1, 1, std::max<std::size_t>(grid.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return rows;
}

namespace {

struct CliOptions {
  std::string verb;
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out;
  std::vector<std::string> sets;
};

class Runner {
 public:
  Runner(const CliOptions& opts, std::ostream& out)
      : opts_(opts), out_(out) {}

  int run() {
    if (!opts_.config.empty()) apply_config_file(cfg_, opts_.config);
    for (const auto& s : opts_.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("--set expects key=value, got '" + s + "'");
      }
      apply_setting(cfg_, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    if (opts_.seed) cfg_.seed = *opts_.seed;
    cfg_.validate();

    dir_ = opts_.out;
    if (dir_.empty()) {
      const char* env = std::getenv("TGTLAB_OUT");
      dir_ = env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
    }
    fs::create_directories(dir_);
    task_ = make_task(cfg_.task);

    const std::string& v = opts_.verb;
    if (v == "gen-data") return gen_data();
    if (v == "train-generator") return train_generator_cmd();
    if (v == "train-teacher") return train_teacher_cmd();
    if (v == "train-student") return train_student_cmd();
    if (v == "sweep") return sweep_cmd();
    if (v == "bounds") return bounds_cmd();
    if (v == "selftest") return selftest();
    throw ConfigError("unknown command '" + v + "'");
  }

 private:
  fs::path model_path(const fs::path& configured, const char* fallback) const {
    return configured.empty() ? dir_ / fallback : configured;
  }

  static MlpParams load_model(const fs::path& path, const char* what) {
    if (!fs::exists(path)) {
      throw ConfigError(std::string("missing ") + what + " model file " + path.string());
    }
    return load_mlp(path);
  }

  static SampleSet load_set(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("missing data file " + path.string());
    return load_sample_csv(path);
  }

  SampleSet labeled_set() const {
    if (!cfg_.labeled_csv.empty()) return load_set(cfg_.labeled_csv);
    return sample_labeled(task_, cfg_.n, mix_seed(cfg_.seed, 1));
  }

  SampleSet test_set() const {
    if (!cfg_.test_csv.empty()) return load_set(cfg_.test_csv);
    return sample_labeled(task_, cfg_.test_size, mix_seed(cfg_.seed, 2));
  }

  template <typename Fn>
  void write_file(const fs::path& name, Fn&& fn) const {
    const fs::path path = dir_ / name;
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    fn(os);
    if (!os) throw Error("write failed for " + path.string());
  }

  int gen_data() {
    const Index d = cfg_.task.latent_dim;
    const SampleSet labeled = labeled_set();
    const SampleSet test = test_set();
    save_sample_csv(dir_ / "labeled.csv", labeled, d);
    save_sample_csv(dir_ / "test.csv", test, d);
    out_ << "wrote labeled.csv (" << labeled.size() << ") and test.csv ("
         << test.size() << ")\n";
    return kExitOk;
  }

  int train_generator_cmd() {
    const SampleSet pool =
        sample_unlabeled(task_, cfg_.generator_pool, mix_seed(cfg_.seed, 3));
    TrainConfig tc = cfg_.generator;
    tc.seed = cfg_.seed;
    const GeneratorResult g = train_generator(task_, pool, tc);
    save_mlp(dir_ / "enc.mlp", g.enc);
    save_mlp(dir_ / "dec.mlp", g.dec);
    write_file("generator_history.csv", [&](std::ostream& os) {
      os << "epoch,mse\n";
      for (std::size_t e = 0; e < g.loss_history.size(); ++e) {
        os << e << ',' << fmt(g.loss_history[e]) << '\n';
      }
    });
    out_ << "generator: eps_mean " << g.eps_mean << " eps_max " << g.eps_max << '\n';
    return kExitOk;
  }

  int train_teacher_cmd() {
    const SampleSet pool =
        sample_labeled(task_, cfg_.teacher_pool, mix_seed(cfg_.seed, 4));
    TrainConfig tc = cfg_.teacher;
    tc.seed = cfg_.seed;
    const TeacherResult t = train_teacher(task_, pool, tc);
    save_mlp(dir_ / "teacher.mlp", t.h);
    write_file("teacher_history.csv", [&](std::ostream& os) {
      os << "epoch,loss\n";
      for (std::size_t e = 0; e < t.loss_history.size(); ++e) {
        os << e + 1 << ',' << fmt(t.loss_history[e]) << '\n';
      }
    });
    write_file("teacher_summary.csv", [&](std::ostream& os) {
      os << "accuracy,teacher_penalty\n"
         << fmt(t.accuracy) << ',' << fmt(t.teacher_penalty) << '\n';
    });
    out_ << "teacher: accuracy " << t.accuracy << " penalty " << t.teacher_penalty
         << '\n';
    return kExitOk;
  }

  // Loads the artifacts `methods` need; absent ones stay null.
  void load_models(const std::vector<Method>& methods) {
    bool need_h = false;
    bool need_gen = false;
    for (Method m : methods) {
      need_h = need_h || m != Method::kOneHot;
      need_gen = need_gen || m == Method::kTgtRandom || m == Method::kTgtGradient;
    }
    if (need_gen) {
      enc_ = load_model(model_path(cfg_.enc_path, "enc.mlp"), "encoder");
      dec_ = load_model(model_path(cfg_.dec_path, "dec.mlp"), "decoder");
    }
    if (need_h) h_ = load_model(model_path(cfg_.teacher_path, "teacher.mlp"), "teacher");
  }

  StudentInputs inputs(const SampleSet* test) const {
    return StudentInputs{enc_ ? &*enc_ : nullptr, dec_ ? &*dec_ : nullptr,
                         h_ ? &*h_ : nullptr, test};
  }

  int train_student_cmd() {
    const Method method = cfg_.student.method;
    load_models({method});
    const SampleSet labeled = labeled_set();
    const SampleSet test = test_set();
    TrainConfig tc = cfg_.student_config(method);
    tc.seed = cfg_.seed;
    const StudentResult r = train_student(task_, labeled, tc, inputs(&test));
    const std::string name(method_name(method));
    save_mlp(dir_ / ("student_" + name + ".mlp"), r.f);
    write_file("history_" + name + ".csv",
               [&](std::ostream& os) { write_history_csv(os, r.history); });
    if (!r.history.empty()) {
      out_ << "student " << name << ": test_err " << r.history.back().test_err
           << " test_risk " << r.history.back().test_risk << '\n';
    }
    return kExitOk;
  }

  int sweep_cmd() {
    load_models(cfg_.methods);
    const SampleSet test = test_set();
    const std::vector<SweepRow> rows = run_sweep(cfg_, task_, inputs(&test), opts_.jobs);
    for (const auto& r : rows) {
      if (!std::isfinite(r.final_test_err) || !std::isfinite(r.final_test_risk)) {
        throw NumericError("sweep produced a non-finite result");
      }
    }
    const auto summary = summarize_sweep(rows);
    write_file("sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, rows); });
    write_file("sweep_summary.csv",
               [&](std::ostream& os) { write_sweep_summary_csv(os, summary); });
    for (const auto& s : summary) {
      out_ << method_name(s.method) << " n=" << s.n << " mean_test_err "
           << s.mean_test_err << " se " << s.se_test_err << '\n';
    }
    return kExitOk;
  }

  int bounds_cmd() {
    const Method method = cfg_.student.method;
    const MlpParams enc = load_model(model_path(cfg_.enc_path, "enc.mlp"), "encoder");
    const MlpParams dec = load_model(model_path(cfg_.dec_path, "dec.mlp"), "decoder");
    const MlpParams h = load_model(model_path(cfg_.teacher_path, "teacher.mlp"), "teacher");
    const std::string student_file = "student_" + std::string(method_name(method)) + ".mlp";
    const MlpParams f =
        load_model(model_path(cfg_.student_path, student_file.c_str()), "student");
    BoundConfig bc = cfg_.bounds;
    const TrainConfig tc = cfg_.student_config(method);
    bc.explore = tc.explore;
    bc.seed = cfg_.seed;
    const BoundReport report = evaluate_bounds(task_, enc, dec, h, f, tc.temperature, bc);
    write_file("bounds.csv", [&](std::ostream& os) { write_bound_csv(os, report); });
    write_file("bounds.txt", [&](std::ostream& os) { write_bound_table(os, report); });
    write_bound_table(out_, report);
    return kExitOk;
  }

  int selftest() {
    int failed = 0;
    auto report = [&](const char* name, bool ok) {
      out_ << "selftest " << name << ' ' << (ok ? "PASS" : "FAIL") << '\n';
      if (!ok) ++failed;
    };
    Rng rng = make_rng(cfg_.seed, 7);

    // Autodiff against central differences on a small softmax loss.
    const Tensor w0 = standard_normal(3, 4, rng);
    const Tensor x = standard_normal(4, 5, rng);
    const int labels[] = {0, 2, 1, 1, 0};
    const double rel = grad_check(
        [&](Tape& t, NodeId w) {
          return record_class_loss(t, t.matmul(w, t.input(x)), labels, 1.0);
        },
        w0, 1e-5);
    report("gradient", rel <= 1e-4);

    // One-hot teacher turns the distillation loss into the class loss.
    const Tensor logits = standard_normal(3, 5, rng);
    const Vector a = distill_losses(logits, one_hot(labels, 3), 1.0);
    const Vector b = class_losses(logits, labels, 1.0);
    report("one-hot-distill", (a - b).cwiseAbs().maxCoeff() == 0.0);

    // Assignment W1 against every permutation.
    const Tensor p = standard_normal(2, 6, rng);
    const Tensor q = standard_normal(2, 6, rng);
    const Tensor dist = pairwise_distances(p, q);
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (int i = 0; i < 6; ++i) c += dist(i, perm[i]);
      best = std::min(best, c / 6.0);
    } while (std::next_permutation(perm.begin(), perm.end()));
    report("wasserstein", std::abs(wasserstein1(p, q) - best) <= 1e-9);

    // Zero-noise exploration reproduces the reconstruction.
    const MlpParams enc = init_params(Architecture::chain({4, 8, 2}, Activation::kTanh), 1, "enc");
    const MlpParams dec = init_params(Architecture::chain({2, 8, 4}, Activation::kTanh), 2, "dec");
    const Explored e = tgt_random(x, enc, dec, 0.0, rng);
    report("zero-noise", e.x == mlp_apply_columns(dec, mlp_apply_columns(enc, x)));

    return failed == 0 ? kExitOk : kExitCheckFailed;
  }

  const CliOptions& opts_;
  std::ostream& out_;
  ExperimentConfig cfg_;
  fs::path dir_;
  ManifoldTask task_;
  std::optional<MlpParams> enc_, dec_, h_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"tgtlab: teacher guided training laboratory", "tgtlab"};
  CliOptions opts;
  app.add_option("--config", opts.config, "config file (key = value lines)");
  app.add_option("--seed", opts.seed, "master seed");
  app.add_option("--jobs", opts.jobs, "worker threads for sweep")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", opts.out, "output directory (default $TGTLAB_OUT or .)");
  app.add_option("--set", opts.sets, "override, key=value (repeatable)");
  app.require_subcommand(1, 1);
  const std::pair<const char*, const char*> verbs[] = {
      {"gen-data", "sample labeled and test sets to CSV"},
      {"train-generator", "train the encoder/decoder pair"},
      {"train-teacher", "train the teacher labeler"},
      {"train-student", "train one student with student.method"},
      {"sweep", "method x n x seed student sweep"},
      {"bounds", "evaluate every bound term"},
      {"selftest", "quick internal consistency checks"},
  };
  for (const auto& [name, help] : verbs) {
    app.add_subcommand(name, help)->fallthrough();
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "tgtlab: " << e.what() << '\n';
    return kExitUsage;
  }
  opts.verb = app.get_subcommands().front()->get_name();

  try {
    Runner runner(opts, out);
    return runner.run();
  } catch (const NumericError& e) {
    err << "tgtlab: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ConfigError& e) {
    err << "tgtlab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "tgtlab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "tgtlab: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

}  // namespace tgt
