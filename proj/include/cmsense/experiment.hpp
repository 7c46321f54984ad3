#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmsense/channels.hpp"
#include "cmsense/evaluation.hpp"
#include "cmsense/io.hpp"
#include "cmsense/lbcs.hpp"
#include "cmsense/train.hpp"

namespace cmsense {

inline constexpr const char* kVersion = "1.0.0";

enum class ValidationMetric { Mmd2, RecoveryMse };

struct ExperimentConfig {
  ChannelModelSpec model;
  int m = 0;
  std::vector<double> snr_grid_db;
  // Any subset of: random, lbcs, learned, learned-lbcs-init.
  std::vector<std::string> algorithms;

  int test_count = 10000;
  int train_count = 50000;       // learner training pool
  int val_count = 1000;
  int lbcs_train_count = 100000; // row-scoring pool
  int lbcs_iterations = 100;     // Monte-Carlo candidates per SNR
  double lbcs_init_snr_db = 20.0;

  std::vector<double> kernel_bandwidths = {2, 5, 10, 20, 40, 80};
  SearchSpace search;
  int max_iterations = 4000;
  int validation_interval = 100;
  int patience = 20;
  Normalization normalization = Normalization::Average;
  SphereMode sphere_mode = SphereMode::Fresh;
  ValidationMetric validation_metric = ValidationMetric::Mmd2;
  double metric_snr_db = 20.0;  // used by the recovery-MSE metric

  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string output_dir = ".";
  int threads = 1;
};

inline const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names = {"random", "lbcs", "learned",
                                                 "learned-lbcs-init"};
  return names;
}

inline void validate(const ExperimentConfig& cfg) {
  validate(cfg.model);
  if (cfg.m < 1 || cfg.m > cfg.model.n)
    throw std::invalid_argument("ExperimentConfig: need 1 <= m <= n");
  if (cfg.snr_grid_db.empty()) throw std::invalid_argument("ExperimentConfig: empty SNR grid");
  for (const double s : cfg.snr_grid_db)
    if (std::isnan(s)) throw std::invalid_argument("ExperimentConfig: NaN in SNR grid");
  if (cfg.algorithms.empty())
    throw std::invalid_argument("ExperimentConfig: no algorithms selected");
  for (const std::string& a : cfg.algorithms) {
    const auto& known = known_algorithms();
    if (std::find(known.begin(), known.end(), a) == known.end())
      throw std::invalid_argument("ExperimentConfig: unknown algorithm '" + a + "'");
    if (std::count(cfg.algorithms.begin(), cfg.algorithms.end(), a) != 1)
      throw std::invalid_argument("ExperimentConfig: duplicate algorithm '" + a + "'");
  }
  if (cfg.test_count < 1 || cfg.val_count < 1 || cfg.train_count < 1 ||
      cfg.lbcs_train_count < 1)
    throw std::invalid_argument("ExperimentConfig: sample counts must be positive");
  if (cfg.lbcs_iterations < 1)
    throw std::invalid_argument("ExperimentConfig: lbcs_iterations must be positive");
  if (cfg.model.p > cfg.m)
    throw std::invalid_argument("ExperimentConfig: recovery needs p <= m");
  KernelSpec probe(cfg.kernel_bandwidths);  // validates the bandwidths
  validate(cfg.search);
  if (cfg.max_iterations < 1)
    throw std::invalid_argument("ExperimentConfig: max_iterations must be positive");
  if (cfg.validation_interval < 1 || cfg.patience < 1)
    throw std::invalid_argument("ExperimentConfig: invalid validation settings");
  if (cfg.search.batch_max > cfg.train_count)
    throw std::invalid_argument("ExperimentConfig: search batch range exceeds train_count");
  if (!cfg.seed_set) throw std::invalid_argument("ExperimentConfig: seed is required");
  if (cfg.threads < 1) throw std::invalid_argument("ExperimentConfig: threads must be positive");
}

inline std::string model_dir_tag(ChannelModel model) {
  switch (model) {
    case ChannelModel::CanonicalSparse: return "true_sparse";
    case ChannelModel::DftSparse: return "basis_sparse";
    case ChannelModel::Multipath: return "dictionary_sparse";
  }
  throw std::invalid_argument("model_dir_tag: unknown channel model");
}

inline std::string config_file_stem(const ExperimentConfig& cfg) {
  return "nAntennas_" + std::to_string(cfg.model.n) + "_nPaths_" + std::to_string(cfg.model.p) +
         "_nObservations_" + std::to_string(cfg.m);
}

inline std::string format_snr_tag(double snr_db) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", snr_db);
  std::string s = buf;
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

struct ExperimentResult {
  std::vector<EvalRecord> records;
  std::string csv_path;
  std::string metadata_path;
  std::vector<std::string> matrix_paths;
};

namespace detail {

inline ChannelSet slice(const ChannelSet& pool, Eigen::Index count) {
  ChannelSet out;
  out.model = pool.model;
  out.normalization = pool.normalization;
  out.samples = pool.samples.leftCols(count);
  return out;
}

struct StageGuard {
  std::vector<std::filesystem::path> created;
  bool committed = false;

  void track(const std::filesystem::path& p) { created.push_back(p); }
  ~StageGuard() {
    if (committed) return;
    for (const auto& p : created) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  }
};

}  // namespace detail

// Full pipeline: generate data, build each requested matrix, sweep the SNR
// grid with OMP recovery, and write one CSV plus a metadata file (and the
// matrices) under output_dir/<model tag>/. A stage failure removes the
// partial outputs and rethrows with the stage name attached.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const SeededRng master(cfg.seed);
  const KernelSpec kernel(cfg.kernel_bandwidths);
  const Dictionary psi = dictionary_for_model(cfg.model);

  const std::filesystem::path dir =
      std::filesystem::path(cfg.output_dir) / model_dir_tag(cfg.model.model);
  const std::string stem = config_file_stem(cfg);

  detail::StageGuard guard;
  ExperimentResult result;
  std::string stage = "setup";
  try {
    std::filesystem::create_directories(dir);
    stage = "generate-data";
    const bool wants_learner =
        std::find(cfg.algorithms.begin(), cfg.algorithms.end(), "learned") !=
            cfg.algorithms.end() ||
        std::find(cfg.algorithms.begin(), cfg.algorithms.end(), "learned-lbcs-init") !=
            cfg.algorithms.end();
    const bool wants_lbcs =
        std::find(cfg.algorithms.begin(), cfg.algorithms.end(), "lbcs") != cfg.algorithms.end() ||
        std::find(cfg.algorithms.begin(), cfg.algorithms.end(), "learned-lbcs-init") !=
            cfg.algorithms.end();
    Eigen::Index pool_count = 0;
    if (wants_learner) pool_count = cfg.train_count;
    if (wants_lbcs) pool_count = std::max<Eigen::Index>(pool_count, cfg.lbcs_train_count);
    const SeededRng data_rng = master.stream("data");
    const ChannelSet train_pool =
        pool_count > 0 ? generate_channels(cfg.model, pool_count, data_rng.stream("train"))
                       : ChannelSet{};
    const ChannelSet val_set =
        generate_channels(cfg.model, cfg.val_count, data_rng.stream("val"));
    const ChannelSet test_set =
        generate_channels(cfg.model, cfg.test_count, data_rng.stream("test"));

    const SeededRng noise_rng = master.stream("noise");
    nlohmann::json matrices_meta = nlohmann::json::object();

    const TrainConfig base_train = [&] {
      TrainConfig base;
      base.max_iterations = cfg.max_iterations;
      base.validation_interval = cfg.validation_interval;
      base.patience = cfg.patience;
      base.normalization = cfg.normalization;
      base.sphere_mode = cfg.sphere_mode;
      return base;
    }();

    const auto scorer = [&](const TrainReport& report) {
      if (cfg.validation_metric == ValidationMetric::Mmd2) return report.best_validation;
      const EvalRecord rec =
          evaluate(phases_to_matrix(report.phases), val_set, cfg.metric_snr_db, cfg.model.p, psi,
                   master.stream("metric-noise"), 0, "metric", cfg.threads);
      return rec.relative_mse;
    };

    for (const std::string& algorithm : cfg.algorithms) {
      if (algorithm == "random") {
        stage = "random-baseline";
        for (std::size_t s = 0; s < cfg.snr_grid_db.size(); ++s) {
          EvalRecord rec = evaluate_random_baseline(
              test_set, cfg.snr_grid_db[s], cfg.model.p, psi, cfg.m,
              master.stream("baseline").at(static_cast<std::uint64_t>(s)), noise_rng, s, "random",
              cfg.threads);
          result.records.push_back(std::move(rec));
        }
      } else if (algorithm == "lbcs") {
        stage = "lbcs";
        const ChannelSet lbcs_train = detail::slice(train_pool, cfg.lbcs_train_count);
        for (std::size_t s = 0; s < cfg.snr_grid_db.size(); ++s) {
          const double snr = cfg.snr_grid_db[s];
          const McLbcsResult mc =
              mc_lbcs(lbcs_train, val_set, snr, cfg.m, cfg.lbcs_iterations, cfg.model.p, psi,
                      master.stream("lbcs").at(static_cast<std::uint64_t>(s)), cfg.threads);
          const std::string mat_path =
              (dir / ("lbcs_" + stem + "_snr_" + format_snr_tag(snr) + ".txt")).string();
          save_complex_matrix(mc.matrix, mat_path);
          guard.track(mat_path);
          result.matrix_paths.push_back(mat_path);
          matrices_meta["lbcs_snr_" + format_snr_tag(snr)] = mat_path;
          EvalRecord rec =
              evaluate(mc.matrix, test_set, snr, cfg.model.p, psi, noise_rng, s, "lbcs",
                       cfg.threads);
          rec.aux.emplace_back("mc_best_mse", detail::format_double(mc.best_mse));
          result.records.push_back(std::move(rec));
        }
      } else if (algorithm == "learned" || algorithm == "learned-lbcs-init") {
        stage = algorithm;
        const ChannelSet learner_train = detail::slice(train_pool, cfg.train_count);
        TrainConfig base = base_train;
        SeededRng search_rng = master.stream(algorithm == "learned" ? "search" : "search-init");
        if (algorithm == "learned-lbcs-init") {
          const ChannelSet lbcs_train = detail::slice(train_pool, cfg.lbcs_train_count);
          const McLbcsResult mc =
              mc_lbcs(lbcs_train, val_set, cfg.lbcs_init_snr_db, cfg.m, cfg.lbcs_iterations,
                      cfg.model.p, psi, master.stream("lbcs-init"), cfg.threads);
          base.init = InitMode::FromPhases;
          base.init_phases = PhaseMatrix(mc.matrix.array().arg().matrix());
        }
        const SearchResult search = random_search(learner_train, val_set, cfg.search, base,
                                                  kernel, cfg.m, search_rng, cfg.threads, scorer);
        const std::string mat_path = (dir / (algorithm + "_" + stem + ".txt")).string();
        save_phase_matrix(search.best.phases, mat_path);
        guard.track(mat_path);
        result.matrix_paths.push_back(mat_path);
        matrices_meta[algorithm] = mat_path;
        const std::string report_path = (dir / (algorithm + "_" + stem + "_report.txt")).string();
        save_train_report(search.best, report_path);
        guard.track(report_path);
        result.matrix_paths.push_back(report_path);
        const Eigen::MatrixXcd a = phases_to_matrix(search.best.phases);
        for (std::size_t s = 0; s < cfg.snr_grid_db.size(); ++s) {
          EvalRecord rec = evaluate(a, test_set, cfg.snr_grid_db[s], cfg.model.p, psi, noise_rng,
                                    s, algorithm, cfg.threads);
          rec.aux.emplace_back("delta",
                               cfg.normalization == Normalization::Average ? "1.0" : "0.0");
          result.records.push_back(std::move(rec));
        }
      }
    }

    stage = "write-outputs";
    result.csv_path = (dir / (stem + ".csv")).string();
    write_csv(result.records, result.csv_path);
    guard.track(result.csv_path);

    nlohmann::json meta;
    meta["version"] = kVersion;
    meta["seed"] = cfg.seed;
    meta["model"] = to_string(cfg.model.model);
    meta["n"] = cfg.model.n;
    meta["p"] = cfg.model.p;
    meta["L"] = cfg.model.grid_size();
    meta["m"] = cfg.m;
    meta["snr_grid_db"] = cfg.snr_grid_db;
    meta["algorithms"] = cfg.algorithms;
    meta["test_count"] = cfg.test_count;
    meta["train_count"] = cfg.train_count;
    meta["val_count"] = cfg.val_count;
    meta["lbcs_train_count"] = cfg.lbcs_train_count;
    meta["lbcs_iterations"] = cfg.lbcs_iterations;
    meta["lbcs_init_snr_db"] = cfg.lbcs_init_snr_db;
    meta["kernel_bandwidths"] = cfg.kernel_bandwidths;
    meta["search_trials"] = cfg.search.trials;
    meta["normalization"] = to_string(cfg.normalization);
    meta["sphere_mode"] = cfg.sphere_mode == SphereMode::Fresh ? "fresh" : "paired";
    meta["validation_metric"] =
        cfg.validation_metric == ValidationMetric::Mmd2 ? "mmd2" : "recovery-mse";
    meta["threads"] = cfg.threads;
    meta["csv"] = result.csv_path;
    meta["matrices"] = matrices_meta;
    result.metadata_path = (dir / (stem + "_meta.json")).string();
    std::ofstream meta_out(result.metadata_path);
    if (!meta_out) throw std::runtime_error("cannot open for writing: " + result.metadata_path);
    meta_out << meta.dump(2) << '\n';
    guard.track(result.metadata_path);

    guard.committed = true;
    return result;
  } catch (const std::exception& e) {
    throw std::runtime_error("run_experiment: stage '" + stage + "' failed: " + e.what());
  }
}

}  // namespace cmsense
