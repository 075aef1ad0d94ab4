// Copyright 2026 The subdpp Authors.
//
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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "subdpp/subdpp.hpp"

namespace subdpp::cli {

namespace fs = std::filesystem;

namespace {

// Flag value if given, else the config entry, else the default. Every
// lookup is recorded so the resolved configuration can be hashed.
class Settings {
 public:
  explicit Settings(const std::string& path) {
    if (!path.empty()) {
      config_ = read_json(path);
      if (!config_.is_object()) fail(ErrorKind::kInvalidArgument, "config must be a JSON object");
    } else {
      config_ = Json::object();
    }
    resolved_ = Json::object();
  }

  template <class T>
  T get(const std::optional<T>& flag, const char* key, T fallback) {
    T value = fallback;
    if (flag) {
      value = *flag;
    } else if (config_.contains(key)) {
      try {
        value = config_[key].get<T>();
      } catch (const Json::exception& e) {
        fail(ErrorKind::kInvalidArgument, std::string("config key '") + key + "': " + e.what());
      }
    }
    resolved_[key] = value;
    return value;
  }

  const Json& raw() const { return config_; }
  Json& resolved() { return resolved_; }

 private:
  Json config_;
  Json resolved_;
};

void run_jobs(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, count);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

GroundSet load_ground(const std::string& path) {
  const Json j = read_json(path);
  if (j.contains("ground")) return ground_from_json(j["ground"]);
  if (j.contains("type")) return ground_from_json(j);
  if (j.contains("m") && j.contains("d") && j.contains("a")) {
    return GroundSet::continuous_fourier(j["m"].get<int>(), j["d"].get<int>());
  }
  fail(ErrorKind::kInvalidArgument, path + " holds no ground set");
}

Index row_dimension(const GroundSet& g) {
  return g.kind() == GroundKind::kContinuousFourier
             ? static_cast<Index>(std::get<ContinuousFourier>(g.variant()).m)
             : g.dimension();
}

ThetaMode parse_mode(const std::string& s) {
  if (s == "shared") return ThetaMode::kShared;
  if (s == "per_observation") return ThetaMode::kPerObservation;
  fail(ErrorKind::kInvalidArgument, "mode must be 'shared' or 'per_observation'");
}

void split_corpus(const Corpus& all, double train_fraction, Corpus& train, Corpus& test) {
  require(train_fraction > 0.0 && train_fraction <= 1.0, ErrorKind::kInvalidArgument,
          "train_fraction must lie in (0, 1]");
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * all.size()));
  train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cut));
  test.assign(all.begin() + static_cast<std::ptrdiff_t>(cut), all.end());
}

OptimizerConfig resolve_optimizer(Settings& s, const std::optional<int>& max_outer,
                                  const std::optional<int>& inner_iters,
                                  const std::optional<int>& memory,
                                  const std::optional<double>& grad_tol, std::uint64_t seed) {
  OptimizerConfig c;
  if (s.raw().contains("optimizer")) update_optimizer_config(s.raw()["optimizer"], c);
  if (max_outer) c.max_outer = *max_outer;
  if (inner_iters) c.inner_iters = *inner_iters;
  if (memory) c.memory = *memory;
  if (grad_tol) c.grad_tol = *grad_tol;
  c.seed = seed;
  c.validate();
  s.resolved()["optimizer"] = optimizer_config_to_json(c);
  return c;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string config;
  std::optional<std::string> ground;
  std::optional<Index> V;
  std::optional<double> pi;
  std::optional<Index> rank;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<Index> observations;
  std::optional<int> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<double> train_fraction;
  std::optional<double> theta_low;
  std::optional<double> theta_high;
  std::optional<int> grid_side;
  std::optional<double> beta;
  std::optional<std::string> text_input;
  std::optional<Index> vocab_size;
  std::optional<std::string> stopwords;
  std::string out = "data_out";
  int jobs = 1;
};

std::vector<std::string> read_documents(const std::string& path) {
  std::vector<std::string> docs;
  for (const auto& j : read_jsonl(path)) {
    if (j.is_string()) {
      docs.push_back(j.get<std::string>());
    } else if (j.is_object() && j.contains("text") && j["text"].is_string()) {
      docs.push_back(j["text"].get<std::string>());
    } else {
      fail(ErrorKind::kIo, path + ": each line must be a string or {\"text\": ...}");
    }
  }
  return docs;
}

void generate_text(const GenerateArgs& a, Settings& s) {
  const Index V = s.get(a.vocab_size, "vocab_size", Index{500});
  const std::string stop_path = s.get(a.stopwords, "stopwords", default_stopwords_path());
  const std::uint64_t seed = s.get(a.seed, "seed", std::uint64_t{0});
  s.resolved()["text_input"] = *a.text_input;
  const Json meta = make_meta(s.resolved(), seed);
  const auto texts = read_documents(*a.text_input);
  const Vocabulary vocab = build_vocab(texts, V, load_stopwords(stop_path));
  std::vector<Document> docs;
  docs.reserve(texts.size());
  for (const auto& t : texts) docs.push_back(sentence_embed(t, vocab));
  const GroundSet ground = GroundSet::hypercube(sentence_frequencies(docs, vocab.size()));
  ensure_dir(a.out);
  write_vocab(join(a.out, "vocab.json"), vocab, meta);
  write_json(join(a.out, "ground.json"), Json{{"ground", ground_to_json(ground)}, {"meta", meta}});
  write_corpus(join(a.out, "corpus.jsonl"), ground, training_corpus(docs), meta);
  std::cout << "wrote vocabulary of " << vocab.size() << " words and " << docs.size()
            << " documents to " << a.out << "\n";
}

void generate(const GenerateArgs& a) {
  Settings s(a.config);
  if (a.text_input) {
    generate_text(a, s);
    return;
  }
  const std::string kind = s.get(a.ground, "ground", std::string("items"));
  const Index M = s.get(a.observations, "observations", Index{1000});
  const int reps = s.get(a.replicates, "replicates", 10);
  const std::uint64_t seed = s.get(a.seed, "seed", std::uint64_t{0});
  const double frac = s.get(a.train_fraction, "train_fraction", 0.8);
  require(M >= 1 && reps >= 1, ErrorKind::kInvalidArgument,
          "observations and replicates must be positive");

  if (kind == "continuous") {
    const int side = s.get(a.grid_side, "grid_side", 33);
    const double beta = s.get(a.beta, "beta", 2.0);
    require(side >= 1 && side % 2 == 1, ErrorKind::kInvalidArgument, "grid_side must be odd");
    const Json meta = make_meta(s.resolved(), seed);
    const FourierSpectrum spec = synth_spectrum(side, beta);
    run_jobs(static_cast<std::size_t>(reps), a.jobs, [&](std::size_t rep) {
      const std::string dir = join(a.out, "rep_" + std::to_string(rep));
      ensure_dir(dir);
      Rng rng = make_rng(derive_seed(seed, rep), 0);
      Json rmeta = meta;
      rmeta["replicate"] = rep;
      rmeta["seed"] = derive_seed(seed, rep);
      Corpus train, test;
      split_corpus(sample_corpus(spec, M, rng, Index{1} << 20), frac, train, test);
      const GroundSet ground = GroundSet::continuous_fourier(spec.m, spec.d);
      write_spectrum(join(dir, "spectrum.json"), spec, rmeta);
      write_corpus(join(dir, "train.jsonl"), ground, train, rmeta);
      write_corpus(join(dir, "test.jsonl"), ground, test, rmeta);
    });
    std::cout << "wrote " << reps << " continuous replicates to " << a.out << "\n";
    return;
  }

  GroundSet ground = GroundSet::items(1);
  const Index V = s.get(a.V, "V", Index{kind == "hypercube" ? 10 : 100});
  if (kind == "items") {
    ground = GroundSet::items(V);
  } else if (kind == "hypercube") {
    ground = GroundSet::hypercube(V, s.get(a.pi, "pi", 0.5));
  } else {
    fail(ErrorKind::kInvalidArgument, "ground must be items, hypercube or continuous");
  }
  const Index r = s.get(a.rank, "rank", Index{kind == "hypercube" ? 2 : 5});
  const double alpha = s.get(a.alpha, "alpha", 1e-5);
  const double gamma =
      s.get(a.gamma, "gamma", kind == "hypercube" ? 1.0 / static_cast<double>(V) : 0.0);
  const double lo = s.get(a.theta_low, "theta_low", 0.0);
  const double hi = s.get(a.theta_high, "theta_high", 1.0);
  const Json meta = make_meta(s.resolved(), seed);
  run_jobs(static_cast<std::size_t>(reps), a.jobs, [&](std::size_t rep) {
    const std::string dir = join(a.out, "rep_" + std::to_string(rep));
    ensure_dir(dir);
    const std::uint64_t rseed = derive_seed(seed, rep);
    Rng rng = make_rng(rseed, 0);
    Json rmeta = meta;
    rmeta["replicate"] = rep;
    rmeta["seed"] = rseed;
    const LowRankL truth = random_low_rank(ground, r, alpha, gamma, lo, hi, rng);
    write_json(join(dir, "ground.json"), Json{{"ground", ground_to_json(ground)}, {"meta", rmeta}});

    Corpus train, test;
    split_corpus(sample_corpus(truth, M, rng), frac, train, test);
    write_model(join(dir, "truth_shared.json"), truth, {}, rmeta);
    write_corpus(join(dir, "train_shared.jsonl"), ground, train, rmeta);
    write_corpus(join(dir, "test_shared.jsonl"), ground, test, rmeta);

    std::uniform_real_distribution<double> unit(lo, hi);
    std::vector<VectorXd> thetas(static_cast<std::size_t>(M), VectorXd(r));
    for (auto& t : thetas) {
      for (Index k = 0; k < r; ++k) t(k) = unit(rng);
    }
    split_corpus(sample_corpus(truth, thetas, rng), frac, train, test);
    write_model(join(dir, "truth_per_observation.json"), truth, thetas, rmeta);
    write_corpus(join(dir, "train_per_observation.jsonl"), ground, train, rmeta);
    write_corpus(join(dir, "test_per_observation.jsonl"), ground, test, rmeta);
  });
  std::cout << "wrote " << reps << " " << kind << " replicates to " << a.out << "\n";
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string config;
  std::vector<std::string> train;
  std::string ground;
  std::vector<Index> ranks;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<double> penalty;
  std::optional<double> smoothing;
  std::optional<std::string> mode;
  std::optional<int> max_outer;
  std::optional<int> inner_iters;
  std::optional<int> memory;
  std::optional<double> grad_tol;
  std::optional<std::uint64_t> seed;
  std::string init;
  std::string out_dir = ".";
  bool spectrum = false;
  std::optional<int> cv_folds;
  std::vector<int> cv_budgets;
  int jobs = 1;
};

void fit_command(const FitArgs& a) {
  Settings s(a.config);
  require(!a.train.empty(), ErrorKind::kInvalidArgument, "--train is required");
  const GroundSet ground = load_ground(a.ground);
  s.resolved()["ground"] = ground_to_json(ground);
  const std::uint64_t seed = s.get(a.seed, "seed", std::uint64_t{0});
  PenaltyConfig penalty;
  penalty.weight = s.get(a.penalty, "penalty", penalty.weight);
  penalty.smoothing = s.get(a.smoothing, "smoothing", penalty.smoothing);
  const OptimizerConfig opt =
      resolve_optimizer(s, a.max_outer, a.inner_iters, a.memory, a.grad_tol, seed);
  ensure_dir(a.out_dir);

  if (a.spectrum) {
    require(ground.kind() == GroundKind::kContinuousFourier, ErrorKind::kInvalidArgument,
            "--spectrum needs a continuous_fourier ground set");
    const auto& cf = std::get<ContinuousFourier>(ground.variant());
    s.resolved()["spectrum"] = true;
    const int folds = s.get(a.cv_folds, "cv_folds", 0);
    const std::vector<int> budgets =
        a.cv_budgets.empty() ? std::vector<int>{1, 2, 3, 5, 8, 12, 20, 40} : a.cv_budgets;
    if (folds > 0) s.resolved()["cv_budgets"] = budgets;
    const Json meta = make_meta(s.resolved(), seed);
    std::vector<std::string> lines(a.train.size());
    run_jobs(a.train.size(), a.jobs, [&](std::size_t i) {
      const Corpus corpus = read_corpus(a.train[i], row_dimension(ground));
      const DiagonalBaseline base = best_diagonal_baseline(corpus, ground);
      const double eta = base.boundary ? 1e-6 : base.eta;
      OptimizerConfig run = opt;
      std::string chosen;
      if (folds > 0) {
        const SpectrumBudget pick =
            select_spectrum_budget(corpus, cf.m, cf.d, penalty, opt, budgets, folds);
        run.max_outer = 1;
        run.inner_iters = pick.inner_iters;
        chosen = ", cross-validated budget " + std::to_string(pick.inner_iters);
      }
      const FitReport rep = fit_spectrum(corpus, cf.m, cf.d, penalty, run,
                                         VectorXd::Constant(ground.dimension(), eta));
      const std::string name = stem(a.train[i]) + "_spectrum";
      FourierSpectrum spec{cf.m, cf.d, rep.spectrum};
      write_spectrum(join(a.out_dir, name + ".json"), spec, meta);
      write_trace_csv(join(a.out_dir, name + "_trace.csv"), rep.trace, meta);
      lines[i] = name + ": objective " + format_double(rep.final_objective) + " (" +
                 rep.termination + chosen + ")";
    });
    for (const auto& l : lines) std::cout << l << "\n";
    return;
  }

  const double alpha = s.get(a.alpha, "alpha", 0.0);
  const double gamma = s.get(a.gamma, "gamma", 0.0);
  const ThetaMode mode = parse_mode(s.get(a.mode, "mode", std::string("shared")));
  std::vector<Index> ranks = a.ranks;
  if (ranks.empty()) {
    ranks = s.raw().contains("rank") && s.raw()["rank"].is_array()
                ? s.raw()["rank"].get<std::vector<Index>>()
                : std::vector<Index>{s.get(std::optional<Index>{}, "rank", Index{5})};
  }
  s.resolved()["rank"] = ranks;
  s.resolved()["init"] = a.init;
  const Json meta = make_meta(s.resolved(), seed);
  std::optional<FactorParams> init;
  if (!a.init.empty()) {
    const ModelFile f = read_model(a.init);
    init = FactorParams{f.model.U, f.thetas.empty() ? std::vector<VectorXd>{f.model.theta}
                                                     : f.thetas};
  }

  struct Job {
    std::size_t file;
    Index rank;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    for (Index r : ranks) jobs.push_back({i, r});
  }
  std::vector<std::string> lines(jobs.size());
  std::vector<std::shared_ptr<const CorpusObjective>> objectives(a.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    const Corpus corpus = read_corpus(a.train[i], row_dimension(ground));
    if (alpha == 0.0 && gamma == 0.0) {
      // L then has rank at most r, so any larger observation has zero likelihood.
      Index largest = 0;
      for (const auto& X : corpus) largest = std::max(largest, static_cast<Index>(X.size()));
      for (Index r : ranks) {
        if (largest > r) {
          fail(ErrorKind::kInvalidArgument,
               a.train[i] + " has a set of size " + std::to_string(largest) + " but rank " +
                   std::to_string(r) + " with alpha = gamma = 0 cannot exceed " +
                   std::to_string(r) + " points; pass --gamma > 0 or a larger --rank");
        }
      }
    }
    objectives[i] =
        std::make_shared<const CorpusObjective>(ground, alpha, gamma, corpus, penalty, mode);
  }
  run_jobs(jobs.size(), a.jobs, [&](std::size_t j) {
    const Job& job = jobs[j];
    const CorpusObjective& obj = *objectives[job.file];
    OptimizerConfig cfg = opt;
    cfg.seed = derive_seed(seed, j);
    const FitReport rep = fit(obj, job.rank, cfg, init ? &*init : nullptr);
    const std::string name = stem(a.train[job.file]) + "_r" + std::to_string(job.rank);
    Json m = meta;
    m["rank"] = job.rank;
    m["train"] = a.train[job.file];
    m["final_objective"] = rep.final_objective;
    m["mode"] = mode == ThetaMode::kShared ? "shared" : "per_observation";
    m["penalty"] = penalty.weight;
    const LowRankL model = rep.model(ground, alpha, gamma, 0);
    write_model(join(a.out_dir, name + ".json"), model,
                mode == ThetaMode::kShared ? std::vector<VectorXd>{} : rep.thetas, m);
    write_trace_csv(join(a.out_dir, name + "_trace.csv"), rep.trace, m);
    lines[j] = name + ": objective " + format_double(rep.final_objective) + " (" +
               rep.termination + ")";
  });
  for (const auto& l : lines) std::cout << l << "\n";
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string config;
  std::vector<std::string> runs;  // truth,test,model[,train]
  std::string out = "metrics.csv";
  std::optional<int> chance_trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> penalty;
  std::optional<int> inner_iters;
  int jobs = 1;
};

// Mean test log-likelihood when each test observation carries its own theta.
// Fitted models get their theta_i by a per-observation block fit with U fixed.
double per_observation_fitted_loglik(const LowRankL& fitted, const Corpus& test,
                                     const PenaltyConfig& penalty, const OptimizerConfig& opt,
                                     const VectorXd& start) {
  const CorpusObjective obj(fitted.ground, fitted.alpha, fitted.gamma, test, penalty,
                            ThetaMode::kPerObservation);
  const auto fixed = obj.fix_u(fitted.U);
  std::vector<VectorXd> thetas;
  const VectorXd eta0 = start.array().max(1e-300).log().matrix();
  for (Index i = 0; i < obj.num_observations(); ++i) {
    const DifferentiableFn f = [&](const VectorXd& eta, VectorXd* g) {
      const VectorXd theta = eta.array().exp().matrix();
      VectorXd gt;
      const double v = fixed.block_value(i, theta, g != nullptr ? &gt : nullptr);
      if (g != nullptr) *g = theta.cwiseProduct(gt);
      return v;
    };
    thetas.push_back(lbfgs_minimize(f, eta0, opt.lbfgs()).x.array().exp().matrix());
  }
  return mean_log_likelihood(fitted, thetas, test);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void eval_command(const EvalArgs& a) {
  Settings s(a.config);
  require(!a.runs.empty(), ErrorKind::kInvalidArgument, "--run is required");
  const int trials = s.get(a.chance_trials, "chance_trials", 1000);
  const std::uint64_t seed = s.get(a.seed, "seed", std::uint64_t{0});
  PenaltyConfig penalty;
  penalty.weight = s.get(a.penalty, "penalty", penalty.weight);
  OptimizerConfig opt;
  opt.inner_iters = s.get(a.inner_iters, "inner_iters", opt.inner_iters);
  s.resolved()["runs"] = a.runs;
  const Json meta = make_meta(s.resolved(), seed);

  std::vector<std::vector<MetricRecord>> per_run(a.runs.size());
  run_jobs(a.runs.size(), a.jobs, [&](std::size_t k) {
    const auto parts = split_commas(a.runs[k]);
    require(parts.size() == 3 || parts.size() == 4, ErrorKind::kInvalidArgument,
            "--run takes truth,test,model[,train]");
    const std::string dataset = fs::path(parts[0]).parent_path().filename().string();
    auto& rows = per_run[k];
    const Json truth_json = read_json(parts[0]);
    const auto push = [&](const std::string& name, double v, Index r, Index V) {
      rows.push_back({name, v, r, V, seed, dataset.empty() ? std::to_string(k) : dataset, 0});
    };

    if (!truth_json.contains("version")) {
      // Diagonal stationary model: truth and fit are spectra.
      const FourierSpectrum truth = read_spectrum(parts[0]);
      const FourierSpectrum fitted = read_spectrum(parts[2]);
      const Corpus test = read_corpus(parts[1], truth.m);
      const double ll_truth = mean_log_likelihood(truth, test);
      const double ll_fit = mean_log_likelihood(fitted, test);
      const Index V = truth.dimension();
      push("test_loglik_truth", ll_truth, V, V);
      push("test_loglik_fit", ll_fit, V, V);
      push("loglik_gap", ll_truth - ll_fit, V, V);
      if (parts.size() == 4) {
        const Corpus train = read_corpus(parts[3], truth.m);
        const DiagonalBaseline base =
            best_diagonal_baseline(train, GroundSet::continuous_fourier(truth.m, truth.d));
        const FourierSpectrum flat{truth.m, truth.d, VectorXd::Constant(V, base.eta)};
        const double ll_base = mean_log_likelihood(flat, test);
        push("eta_star", base.eta, V, V);
        push("test_loglik_baseline", ll_base, V, V);
        push("baseline_gap", ll_truth - ll_base, V, V);
      }
      return;
    }

    const ModelFile truth = model_from_json(truth_json);
    const ModelFile fitted = read_model(parts[2]);
    const Index V = truth.model.dimension();
    const Index r = fitted.model.rank();
    const Corpus test = read_corpus(parts[1], row_dimension(truth.model.ground));
    double ll_truth = 0.0;
    double ll_fit = 0.0;
    if (truth.thetas.empty()) {
      ll_truth = mean_log_likelihood(truth.model, test);
      ll_fit = mean_log_likelihood(fitted.model, test);
    } else {
      require(truth.thetas.size() >= test.size(), ErrorKind::kInvalidArgument,
              "truth holds fewer thetas than test observations");
      const std::vector<VectorXd> tail(truth.thetas.end() - static_cast<std::ptrdiff_t>(test.size()),
                                       truth.thetas.end());
      ll_truth = mean_log_likelihood(truth.model, tail, test);
      VectorXd start = fitted.model.theta;
      if (!fitted.thetas.empty()) {
        start.setZero();
        for (const auto& t : fitted.thetas) start += t;
        start /= static_cast<double>(fitted.thetas.size());
      }
      ll_fit = per_observation_fitted_loglik(fitted.model, test, penalty, opt, start);
    }
    push("test_loglik_truth", ll_truth, r, V);
    push("test_loglik_fit", ll_fit, r, V);
    push("loglik_gap", ll_truth - ll_fit, r, V);
    const SubspaceDistance d = subspace_distance(fitted.model.U, truth.model.U);
    push("subspace_distance", d.value, r, V);
    push("rank_deficient", d.rank_deficient ? 1.0 : 0.0, r, V);
    const ChanceLevel c =
        chance_level(V, std::min(r, V), trials, derive_seed(seed, k), &truth.model.U);
    push("chance_analytic", c.analytic, r, V);
    if (trials > 0) push("chance_mc", c.mean, r, V);
    if (parts.size() == 4 && truth.model.ground.kind() != GroundKind::kIntegers) {
      const Corpus train = read_corpus(parts[3], row_dimension(truth.model.ground));
      const DiagonalBaseline base = best_diagonal_baseline(train, truth.model.ground);
      const double ll_base =
          mean_log_likelihood(diagonal_model(truth.model.ground, base.eta), test);
      push("eta_star", base.eta, r, V);
      push("baseline_gap", ll_truth - ll_base, r, V);
    }
  });

  std::vector<MetricRecord> rows;
  for (auto& r : per_run) rows.insert(rows.end(), r.begin(), r.end());
  if (a.runs.size() > 1) {
    // Mean and variance across datasets for each (metric, r).
    std::vector<MetricRecord> agg;
    std::vector<std::pair<std::string, Index>> keys;
    for (const auto& m : rows) {
      const auto key = std::make_pair(m.metric, m.r);
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    for (const auto& [metric, r] : keys) {
      double sum = 0.0, sq = 0.0, n = 0.0;
      Index V = 0;
      for (const auto& m : rows) {
        if (m.metric != metric || m.r != r) continue;
        sum += m.value;
        sq += m.value * m.value;
        n += 1.0;
        V = m.V;
      }
      const double mean = sum / n;
      const double var = n > 1.0 ? std::max(0.0, (sq - n * mean * mean) / (n - 1.0)) : 0.0;
      agg.push_back({"mean:" + metric, mean, r, V, seed, "all", 0});
      agg.push_back({"var:" + metric, var, r, V, seed, "all", 0});
    }
    rows.insert(rows.end(), agg.begin(), agg.end());
  }
  write_metrics_csv(a.out, rows, meta);
  std::cout << "wrote " << rows.size() << " metric rows to " << a.out << "\n";
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  std::string config;
  std::string model;
  std::string spectrum;
  std::optional<int> count;
  std::optional<int> grid_side;
  std::optional<std::uint64_t> seed;
  std::optional<Index> cap;
  std::string out = "samples";
};

void sample_command(const SampleArgs& a) {
  Settings s(a.config);
  const int count = s.get(a.count, "count", 1);
  const std::uint64_t seed = s.get(a.seed, "seed", std::uint64_t{0});
  const Index cap = s.get(a.cap, "cap", kDefaultDenseCap);
  require(count >= 1, ErrorKind::kInvalidArgument, "count must be positive");
  require(a.model.empty() != a.spectrum.empty(), ErrorKind::kInvalidArgument,
          "give exactly one of --model or --spectrum");
  s.resolved()["model"] = a.model;
  s.resolved()["spectrum"] = a.spectrum;
  Rng rng = make_rng(seed, 0);

  if (!a.spectrum.empty()) {
    const FourierSpectrum spec = read_spectrum(a.spectrum);
    const int side = s.get(a.grid_side, "grid_side", 2 * spec.d + 1);
    const Json meta = make_meta(s.resolved(), seed);
    const GroundSet ground = GroundSet::continuous_fourier(spec.m, spec.d);
    const DenseDPP dpp = SpectralFactory(ground, 0.0, std::max(cap, Index{1} << 20), side)
                             .build(spec.a.asDiagonal().toDenseMatrix());
    std::vector<MatrixXd> dpp_sets, iid_sets;
    for (int i = 0; i < count; ++i) {
      dpp_sets.push_back(dpp.observation(sample_dpp(dpp, rng)).rows());
      iid_sets.push_back(sample_uniform_iid(dpp_sets.back().rows(), spec.m, rng));
    }
    write_points_csv(a.out + "_dpp.csv", dpp_sets, "dpp", meta);
    write_points_csv(a.out + "_iid.csv", iid_sets, "iid", meta);
    std::cout << "wrote " << a.out << "_dpp.csv and " << a.out << "_iid.csv\n";
    return;
  }
  const ModelFile f = read_model(a.model);
  const int side = s.get(a.grid_side, "grid_side", 0);
  const Json meta = make_meta(s.resolved(), seed);
  const Corpus corpus = sample_corpus(f.model, count, rng, cap, side);
  write_corpus(a.out + ".jsonl", f.model.ground, corpus, meta);
  std::cout << "wrote " << count << " samples to " << a.out << ".jsonl\n";
}

// --------------------------------------------------------------- summarize

struct SummarizeArgs {
  std::string config;
  std::string model;
  std::string vocab;
  std::string input;
  std::string output = "summaries.jsonl";
  std::optional<Index> length;
  std::optional<double> penalty;
  std::optional<int> inner_iters;
  bool no_fit_theta = false;
  int jobs = 1;
};

void summarize_command(const SummarizeArgs& a) {
  Settings s(a.config);
  SummaryOptions opts;
  opts.length = s.get(a.length, "len", Index{5});
  opts.penalty.weight = s.get(a.penalty, "penalty", opts.penalty.weight);
  opts.optimizer.inner_iters = s.get(a.inner_iters, "inner_iters", opts.optimizer.inner_iters);
  opts.fit_theta = !a.no_fit_theta;
  s.resolved()["fit_theta"] = opts.fit_theta;
  s.resolved()["model"] = a.model;
  s.resolved()["input"] = a.input;
  const Json meta = make_meta(s.resolved(), 0);
  const LowRankL model = read_model(a.model).model;
  const Vocabulary vocab = read_vocab(a.vocab);
  const auto lines = read_jsonl(a.input);
  std::vector<Json> out(lines.size());
  run_jobs(lines.size(), a.jobs, [&](std::size_t i) {
    const Json& j = lines[i];
    Json id = static_cast<std::uint64_t>(i);
    std::string text;
    if (j.is_string()) {
      text = j.get<std::string>();
    } else if (j.is_object() && j.contains("text")) {
      text = j["text"].get<std::string>();
      if (j.contains("id")) id = j["id"];
    } else {
      fail(ErrorKind::kIo, a.input + ": each line must be a string or {\"text\": ...}");
    }
    const Summary sum = summarize_document(text, model, vocab, opts);
    out[i] = Json{{"doc_id", id}, {"selected", sum.selected}, {"gains", sum.gains},
                  {"text", sum.text}};
  });
  write_jsonl(a.output, out, meta);
  std::cout << "wrote " << out.size() << " summaries to " << a.output << "\n";
}

// --------------------------------------------------------------- neighbors

struct NeighborsArgs {
  std::string model;
  std::string vocab;
  std::string word;
  Index k = 10;
};

void neighbors_command(const NeighborsArgs& a) {
  const LowRankL model = read_model(a.model).model;
  std::optional<Vocabulary> vocab;
  if (!a.vocab.empty()) vocab = read_vocab(a.vocab);
  Index w = vocab ? vocab->find(a.word) : -1;
  if (w < 0) {
    try {
      std::size_t used = 0;
      w = static_cast<Index>(std::stoll(a.word, &used));
      if (used != a.word.size()) w = -1;
    } catch (const std::exception&) {
      w = -1;
    }
  }
  if (w < 0) fail(ErrorKind::kInvalidArgument, "unknown word " + a.word);
  std::cout << "word,similarity\n";
  for (const auto& [v, sim] : word_cosine_neighbors(model.U, w, a.k)) {
    const std::string name =
        vocab && v < vocab->size() ? vocab->words[static_cast<std::size_t>(v)] : std::to_string(v);
    std::cout << name << "," << format_double(sim) << "\n";
  }
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return is_numerical(err->kind()) ? kExitNumerical : kExitConfig;
  }
  return 1;
}

void register_commands(CLI::App& app) {
  {
    auto a = std::make_shared<GenerateArgs>();
    auto* c = app.add_subcommand("generate", "Synthetic ground truth and sampled corpora");
    c->add_option("--config", a->config, "Experiment config JSON");
    c->add_option("--ground", a->ground, "items | hypercube | continuous");
    c->add_option("--V", a->V, "Embedding dimension");
    c->add_option("--pi", a->pi, "Bernoulli parameter of the hypercube base measure");
    c->add_option("--rank", a->rank, "Rank of the generating model");
    c->add_option("--alpha", a->alpha, "Identity weight alpha");
    c->add_option("--gamma", a->gamma, "Ridge gamma of A");
    c->add_option("--observations", a->observations, "Observations per replicate");
    c->add_option("--replicates", a->replicates, "Number of replicates");
    c->add_option("--seed", a->seed, "Root seed");
    c->add_option("--train-fraction", a->train_fraction, "Train share of each corpus");
    c->add_option("--theta-low", a->theta_low, "Lower end of the theta distribution");
    c->add_option("--theta-high", a->theta_high, "Upper end of the theta distribution");
    c->add_option("--grid-side", a->grid_side, "Grid side N of the continuous task (odd)");
    c->add_option("--beta", a->beta, "Spectral decay of the continuous task");
    c->add_option("--text-input", a->text_input, "JSONL documents: build vocabulary and corpus");
    c->add_option("--vocab-size", a->vocab_size, "Vocabulary size for --text-input");
    c->add_option("--stopwords", a->stopwords, "Stopword file for --text-input");
    c->add_option("--out", a->out, "Output directory");
    c->add_option("--jobs", a->jobs, "Parallel replicates");
    c->callback([a] { generate(*a); });
  }
  {
    auto a = std::make_shared<FitArgs>();
    auto* c = app.add_subcommand("fit", "Penalized maximum likelihood");
    c->add_option("--config", a->config, "Experiment config JSON");
    c->add_option("--train", a->train, "Training corpus JSONL (repeatable)")->required();
    c->add_option("--ground", a->ground, "JSON holding the ground set (ground.json or a model)")
        ->required();
    c->add_option("--rank", a->ranks, "Rank(s) to fit");
    c->add_option("--alpha", a->alpha, "Identity weight alpha");
    c->add_option("--gamma", a->gamma, "Ridge gamma of A");
    c->add_option("--penalty", a->penalty, "Penalty weight lambda");
    c->add_option("--smoothing", a->smoothing, "Group-norm smoothing epsilon");
    c->add_option("--mode", a->mode, "shared | per_observation");
    c->add_option("--max-outer", a->max_outer, "Alternation rounds");
    c->add_option("--inner-iters", a->inner_iters, "L-BFGS iterations per block");
    c->add_option("--memory", a->memory, "L-BFGS memory");
    c->add_option("--grad-tol", a->grad_tol, "Gradient tolerance");
    c->add_option("--seed", a->seed, "Root seed for initialization");
    c->add_option("--init", a->init, "Model JSON to start from");
    c->add_option("--out-dir", a->out_dir, "Output directory");
    c->add_flag("--spectrum", a->spectrum, "Fit the diagonal stationary spectrum");
    c->add_option("--cv-folds", a->cv_folds,
                  "With --spectrum: pick the L-BFGS budget by k-fold cross-validation");
    c->add_option("--cv-budgets", a->cv_budgets, "Candidate budgets for --cv-folds");
    c->add_option("--jobs", a->jobs, "Parallel fits");
    c->callback([a] { fit_command(*a); });
  }
  {
    auto a = std::make_shared<EvalArgs>();
    auto* c = app.add_subcommand("eval", "Likelihood gaps, subspace distance and chance level");
    c->add_option("--config", a->config, "Experiment config JSON");
    c->add_option("--run", a->runs, "truth,test,model[,train] (repeatable)")->required();
    c->add_option("--out", a->out, "Metrics CSV");
    c->add_option("--chance-trials", a->chance_trials, "Monte-Carlo draws for chance");
    c->add_option("--seed", a->seed, "Seed for Monte-Carlo chance");
    c->add_option("--penalty", a->penalty, "Penalty for per-observation theta fits");
    c->add_option("--inner-iters", a->inner_iters, "L-BFGS iterations for theta fits");
    c->add_option("--jobs", a->jobs, "Parallel runs");
    c->callback([a] { eval_command(*a); });
  }
  {
    auto a = std::make_shared<SampleArgs>();
    auto* c = app.add_subcommand("sample", "Exact DPP draws and i.i.d. uniform contrast");
    c->add_option("--config", a->config, "Experiment config JSON");
    c->add_option("--model", a->model, "Model JSON");
    c->add_option("--spectrum", a->spectrum, "Spectrum JSON of a stationary model");
    c->add_option("--count", a->count, "Number of sets");
    c->add_option("--grid-side", a->grid_side, "Grid side for continuous models");
    c->add_option("--seed", a->seed, "Seed");
    c->add_option("--cap", a->cap, "Largest enumerable ground set");
    c->add_option("--out", a->out, "Output prefix");
    c->callback([a] { sample_command(*a); });
  }
  {
    auto a = std::make_shared<SummarizeArgs>();
    auto* c = app.add_subcommand("summarize", "Greedy-MAP extractive summaries");
    c->add_option("--config", a->config, "Experiment config JSON");
    c->add_option("--model", a->model, "Hypercube model JSON")->required();
    c->add_option("--vocab", a->vocab, "Vocabulary JSON")->required();
    c->add_option("--input", a->input, "Documents JSONL")->required();
    c->add_option("--output", a->output, "Summary JSONL");
    c->add_option("--len", a->length, "Sentences per summary");
    c->add_option("--penalty", a->penalty, "Penalty weight for the document theta fit");
    c->add_option("--inner-iters", a->inner_iters, "L-BFGS iterations for the theta fit");
    c->add_flag("--no-fit-theta", a->no_fit_theta, "Use the model theta as is");
    c->add_option("--jobs", a->jobs, "Parallel documents");
    c->callback([a] { summarize_command(*a); });
  }
  {
    auto a = std::make_shared<NeighborsArgs>();
    auto* c = app.add_subcommand("neighbors", "Nearest words by cosine of embedding rows");
    c->add_option("--model", a->model, "Model JSON")->required();
    c->add_option("--vocab", a->vocab, "Vocabulary JSON");
    c->add_option("--word", a->word, "Query word (or row index)")->required();
    c->add_option("--k", a->k, "Number of neighbors");
    c->callback([a] { neighbors_command(*a); });
  }
}

}  // namespace subdpp::cli
