#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cmsense/adam.hpp"
#include "cmsense/channels.hpp"
#include "cmsense/mmd.hpp"
#include "cmsense/phase_matrix.hpp"
#include "cmsense/rng.hpp"
#include "cmsense/sampling.hpp"

namespace cmsense {

// Whether each gradient batch gets fresh sphere targets or reuses one fixed
// target per training sample.
enum class SphereMode { Fresh, Paired };

enum class InitMode { UniformRandom, FromPhases };

struct TrainConfig {
  int batch_size = 500;        // T
  double learning_rate = 1e-3;
  double decay = 1.0;          // per-epoch multiplier on the learning rate
  int max_iterations = 4000;
  int validation_interval = 100;
  int patience = 20;           // non-improving validation checks before stopping
  InitMode init = InitMode::UniformRandom;
  PhaseMatrix init_phases;     // used when init == FromPhases
  Normalization normalization = Normalization::Average;
  SphereMode sphere_mode = SphereMode::Fresh;
  std::uint64_t seed = 0;
};

inline void validate(const TrainConfig& cfg, Eigen::Index m, Eigen::Index n) {
  if (cfg.batch_size < 2) throw std::invalid_argument("TrainConfig: batch_size must be >= 2");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    throw std::invalid_argument("TrainConfig: learning_rate must be finite and >= 0");
  if (!(cfg.decay > 0.0) || cfg.decay > 1.0)
    throw std::invalid_argument("TrainConfig: decay must be in (0, 1]");
  if (cfg.max_iterations < 0)
    throw std::invalid_argument("TrainConfig: max_iterations must be nonnegative");
  if (cfg.validation_interval < 1)
    throw std::invalid_argument("TrainConfig: validation_interval must be positive");
  if (cfg.patience < 1) throw std::invalid_argument("TrainConfig: patience must be positive");
  if (cfg.init == InitMode::FromPhases &&
      (cfg.init_phases.phases.rows() != m || cfg.init_phases.phases.cols() != n))
    throw std::invalid_argument("TrainConfig: init_phases shape mismatch");
}

struct TraceEntry {
  int iteration = 0;
  double train_objective = 0.0;       // batch objective seen at this iteration
  double validation_objective = 0.0;  // fixed validation set objective
};

struct TrainReport {
  PhaseMatrix phases;           // best-validation iterate
  double best_validation = 0.0;
  int iterations_run = 0;
  std::vector<TraceEntry> trace;
  TrainConfig config;
};

// Stochastic minimization of the sphere-matching objective over the phases.
// Batches are sampled without replacement per iteration; validation uses a
// fixed held-out channel set and a fixed sphere target sample, and the
// returned phases are the iterate with the best validation objective.
// An optional caller-provided validation sphere lets several runs share one
// target sample.
inline TrainReport train(const ChannelSet& train_set, const ChannelSet& val_set,
                         const TrainConfig& cfg, const KernelSpec& kernel, int m,
                         const std::optional<Eigen::MatrixXcd>& shared_val_sphere = std::nullopt) {
  if (m < 1) throw std::invalid_argument("train: m must be positive");
  if (train_set.dim() != val_set.dim())
    throw std::invalid_argument("train: train/validation dimension mismatch");
  const Eigen::Index n = train_set.dim();
  validate(cfg, m, n);
  if (train_set.count() < cfg.batch_size)
    throw std::invalid_argument("train: batch_size exceeds the training set size");
  if (val_set.count() < 1) throw std::invalid_argument("train: empty validation set");

  const ChannelSet tr = apply_normalization(train_set, cfg.normalization);
  const ChannelSet va = apply_normalization(val_set, cfg.normalization);

  SeededRng rng(cfg.seed, "train");
  SeededRng init_rng = rng.stream("init");
  SeededRng batch_rng = rng.stream("train-batch");
  SeededRng noise_rng = rng.stream("noise");
  SeededRng val_noise_rng = rng.stream("val-noise");

  Eigen::MatrixXd phi(m, n);
  if (cfg.init == InitMode::UniformRandom) {
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = 0; r < m; ++r)
        phi(r, c) = 2.0 * std::numbers::pi * init_rng.uniform();
  } else {
    phi = cfg.init_phases.phases;
  }

  const Eigen::MatrixXcd val_sphere =
      shared_val_sphere ? *shared_val_sphere : sample_sphere(m, va.count(), val_noise_rng);
  if (val_sphere.rows() != m || val_sphere.cols() != va.count())
    throw std::invalid_argument("train: validation sphere shape mismatch");

  Eigen::MatrixXcd paired_sphere;
  if (cfg.sphere_mode == SphereMode::Paired)
    paired_sphere = sample_sphere(m, tr.count(), noise_rng.stream("paired"));

  TrainReport report;
  report.config = cfg;
  report.best_validation = mmd2_objective(PhaseMatrix(phi), va.samples, val_sphere, kernel);
  report.phases = PhaseMatrix(phi);
  report.trace.push_back({0, std::numeric_limits<double>::quiet_NaN(), report.best_validation});

  // Persistent permutation; a partial Fisher-Yates pass over any permutation
  // leaves a uniform ordered sample without replacement in the first T slots.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(tr.count()));
  for (Eigen::Index i = 0; i < tr.count(); ++i) order[static_cast<std::size_t>(i)] = i;

  AdamState adam = AdamState::zero(m, n);
  Eigen::MatrixXcd batch_h(n, cfg.batch_size);
  Eigen::MatrixXcd batch_u(m, cfg.batch_size);
  int checks_since_improvement = 0;
  int iterations_run = 0;

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    for (int t = 0; t < cfg.batch_size; ++t) {
      const Eigen::Index j =
          t + static_cast<Eigen::Index>(batch_rng.uniform_index(
                  static_cast<std::uint64_t>(tr.count() - t)));
      std::swap(order[static_cast<std::size_t>(t)], order[static_cast<std::size_t>(j)]);
      batch_h.col(t) = tr.samples.col(order[static_cast<std::size_t>(t)]);
      if (cfg.sphere_mode == SphereMode::Paired)
        batch_u.col(t) = paired_sphere.col(order[static_cast<std::size_t>(t)]);
    }
    if (cfg.sphere_mode == SphereMode::Fresh)
      batch_u = sample_sphere(m, cfg.batch_size, noise_rng.at(static_cast<std::uint64_t>(iter)));

    const MmdValueGrad vg = mmd2_value_and_gradient(PhaseMatrix(phi), batch_h, batch_u, kernel);
    if (!std::isfinite(vg.value) || !vg.gradient.allFinite())
      throw std::runtime_error("train: non-finite objective or gradient at iteration " +
                               std::to_string(iter));

    const auto epoch = static_cast<double>(
        (static_cast<std::int64_t>(iter - 1) * cfg.batch_size) / tr.count());
    const double lr = cfg.learning_rate * std::pow(cfg.decay, epoch);
    adaptive_moment_step(phi, vg.gradient, adam, lr);
    iterations_run = iter;

    if (iter % cfg.validation_interval == 0) {
      const double val = mmd2_objective(PhaseMatrix(phi), va.samples, val_sphere, kernel);
      report.trace.push_back({iter, vg.value, val});
      if (val < report.best_validation) {
        report.best_validation = val;
        report.phases = PhaseMatrix(phi);
        checks_since_improvement = 0;
      } else if (++checks_since_improvement >= cfg.patience) {
        break;
      }
    }
  }

  report.iterations_run = iterations_run;
  return report;
}

struct SearchSpace {
  int trials = 64;
  int batch_min = 150;
  int batch_max = 1500;
  double lr_min = 1e-6;   // log-uniform range
  double lr_max = 5e-3;
  double decay_min = 0.94;
  double decay_max = 1.0;
};

inline void validate(const SearchSpace& space) {
  if (space.trials < 1) throw std::invalid_argument("SearchSpace: trials must be positive");
  if (space.batch_min < 2 || space.batch_max < space.batch_min)
    throw std::invalid_argument("SearchSpace: invalid batch range");
  if (!(space.lr_min > 0.0) || space.lr_max < space.lr_min)
    throw std::invalid_argument("SearchSpace: invalid learning-rate range");
  if (!(space.decay_min > 0.0) || space.decay_max < space.decay_min || space.decay_max > 1.0)
    throw std::invalid_argument("SearchSpace: invalid decay range");
}

struct SearchResult {
  TrainReport best;
  int best_trial = -1;
  std::vector<double> trial_scores;       // +inf for failed trials
  std::vector<std::string> trial_errors;  // empty string when a trial succeeded
};

// Random hyperparameter search: batch size int-uniform, learning rate
// log-uniform, decay uniform. Trial t derives its own RNG substreams from
// rng.at(t), so results do not depend on execution order; the score defaults
// to the best validation objective and ties go to the lowest trial index.
inline SearchResult random_search(
    const ChannelSet& train_set, const ChannelSet& val_set, const SearchSpace& space,
    const TrainConfig& base, const KernelSpec& kernel, int m, SeededRng rng, int threads = 1,
    const std::function<double(const TrainReport&)>& score =
        [](const TrainReport& r) { return r.best_validation; }) {
  validate(space);
  if (m < 1) throw std::invalid_argument("random_search: m must be positive");

  // One shared validation target sample keeps trial comparisons paired.
  const Eigen::MatrixXcd val_sphere =
      sample_sphere(m, val_set.count(), rng.stream("val-noise"));

  std::vector<TrainConfig> configs(static_cast<std::size_t>(space.trials), base);
  for (int t = 0; t < space.trials; ++t) {
    SeededRng r = rng.stream("params").at(static_cast<std::uint64_t>(t));
    TrainConfig& cfg = configs[static_cast<std::size_t>(t)];
    cfg.batch_size = space.batch_min +
                     static_cast<int>(r.uniform_index(
                         static_cast<std::uint64_t>(space.batch_max - space.batch_min + 1)));
    cfg.learning_rate = std::exp(r.uniform(std::log(space.lr_min), std::log(space.lr_max)));
    cfg.decay = r.uniform(space.decay_min, space.decay_max);
    SeededRng sr = rng.stream("trial-seed").at(static_cast<std::uint64_t>(t));
    cfg.seed = sr.next_u64();
  }

  std::vector<TrainReport> reports(static_cast<std::size_t>(space.trials));
  SearchResult result;
  result.trial_scores.assign(static_cast<std::size_t>(space.trials),
                             std::numeric_limits<double>::infinity());
  result.trial_errors.assign(static_cast<std::size_t>(space.trials), "");

  const auto run_trial = [&](int t) {
    const auto u = static_cast<std::size_t>(t);
    try {
      reports[u] = train(train_set, val_set, configs[u], kernel, m, val_sphere);
      result.trial_scores[u] = score(reports[u]);
    } catch (const std::exception& e) {
      result.trial_errors[u] = e.what();
    }
  };

  if (threads <= 1 || space.trials == 1) {
    for (int t = 0; t < space.trials; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    const int workers = std::min(threads, space.trials);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < space.trials; t = next.fetch_add(1)) run_trial(t);
      });
    for (auto& th : pool) th.join();
  }

  for (int t = 0; t < space.trials; ++t) {
    const auto u = static_cast<std::size_t>(t);
    if (!result.trial_errors[u].empty()) continue;
    if (result.best_trial < 0 ||
        result.trial_scores[u] < result.trial_scores[static_cast<std::size_t>(result.best_trial)]) {
      result.best_trial = t;
    }
  }
  if (result.best_trial < 0) {
    std::string causes = "random_search: all trials failed:";
    for (int t = 0; t < space.trials; ++t)
      causes += "\n  trial " + std::to_string(t) + ": " +
                result.trial_errors[static_cast<std::size_t>(t)];
    throw std::runtime_error(causes);
  }
  result.best = reports[static_cast<std::size_t>(result.best_trial)];
  return result;
}

}  // namespace cmsense
