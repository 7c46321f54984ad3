#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cmsense/channels.hpp"
#include "cmsense/omp.hpp"
#include "cmsense/rng.hpp"
#include "cmsense/sampling.hpp"

namespace cmsense {

// Noise standard deviation giving SNR = |A h|^2 / (m sigma^2), in dB.
// +inf dB means noiseless (sigma = 0).
inline double noise_std_for_snr(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& h,
                                double snr_db) {
  if (h.size() != a.cols()) throw std::invalid_argument("noise_std_for_snr: dimension mismatch");
  if (std::isnan(snr_db)) throw std::invalid_argument("noise_std_for_snr: snr_db is NaN");
  const double energy = (a * h).squaredNorm();
  if (energy == 0.0) throw std::domain_error("noise_std_for_snr: A h has zero energy");
  if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
  const double snr = std::pow(10.0, snr_db / 10.0);
  return std::sqrt(energy / (static_cast<double>(a.rows()) * snr));
}

struct EvalRecord {
  std::string algorithm;
  double snr_db = 0.0;
  double relative_mse = 0.0;  // accumulated error energy over accumulated signal energy
  std::vector<std::pair<std::string, std::string>> aux;
};

namespace detail {

inline void parallel_for(Eigen::Index count, int threads,
                         const std::function<void(Eigen::Index)>& body) {
  if (threads <= 1 || count < 2) {
    for (Eigen::Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const int workers = static_cast<int>(std::min<Eigen::Index>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      try {
        for (Eigen::Index i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Draw the length-m noise vector for (sample_index, snr_index). The per-pair
// substream makes the draw independent of evaluation order and of which
// other (sample, snr) pairs are evaluated.
inline Eigen::VectorXcd noise_vector(const SeededRng& noise_rng, Eigen::Index sample_index,
                                     std::size_t snr_index, Eigen::Index m, double sigma) {
  Eigen::VectorXcd nv = Eigen::VectorXcd::Zero(m);
  if (sigma == 0.0) return nv;
  SeededRng r = noise_rng.at(static_cast<std::uint64_t>(sample_index))
                    .at(static_cast<std::uint64_t>(snr_index));
  const double var = sigma * sigma;
  for (Eigen::Index k = 0; k < m; ++k) nv(k) = r.cgauss(var);
  return nv;
}

}  // namespace detail

using Estimator = std::function<Eigen::VectorXcd(const Eigen::VectorXcd& y)>;

// Sweep the data set once at a fixed SNR: per sample, scale the noise to the
// target SNR, measure, estimate, and accumulate error and signal energies.
// The returned mean is the ratio of the two accumulated sums. matrix_for
// supplies the measurement matrix for each sample index (fixed for a learned
// or subsampled matrix, fresh per sample for random baselines).
inline EvalRecord evaluate_with_estimator(
    const std::function<const Eigen::MatrixXcd&(Eigen::Index)>& matrix_for,
    const std::function<Estimator(const Eigen::MatrixXcd&)>& make_estimator,
    const ChannelSet& data, double snr_db, const SeededRng& noise_rng, std::size_t snr_index,
    std::string label, int threads = 1) {
  if (data.count() < 1) throw std::invalid_argument("evaluate: empty data set");
  const Eigen::Index count = data.count();
  Eigen::VectorXd err(count), energy(count);

  detail::parallel_for(count, threads, [&](Eigen::Index i) {
    const Eigen::VectorXcd h = data.samples.col(i);
    const Eigen::MatrixXcd& a = matrix_for(i);
    if (a.cols() != data.dim())
      throw std::invalid_argument("evaluate: matrix/channel dimension mismatch");
    const double sigma = noise_std_for_snr(a, h, snr_db);
    const Eigen::VectorXcd y =
        a * h + detail::noise_vector(noise_rng, i, snr_index, a.rows(), sigma);
    const Eigen::VectorXcd estimate = make_estimator(a)(y);
    if (estimate.size() != h.size())
      throw std::invalid_argument("evaluate: estimator output dimension mismatch");
    err(i) = (estimate - h).squaredNorm();
    energy(i) = h.squaredNorm();
  });

  double err_sum = 0.0, energy_sum = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {  // fixed order, independent of threading
    err_sum += err(i);
    energy_sum += energy(i);
  }
  if (energy_sum == 0.0) throw std::domain_error("evaluate: data set has zero total energy");

  EvalRecord rec;
  rec.algorithm = std::move(label);
  rec.snr_db = snr_db;
  rec.relative_mse = err_sum / energy_sum;
  return rec;
}

inline Estimator omp_estimator(const Eigen::MatrixXcd& a, const Dictionary& psi, int sparsity) {
  if (psi.dim() != a.cols()) throw std::invalid_argument("omp_estimator: dictionary mismatch");
  Eigen::MatrixXcd effective = a * psi.matrix;  // m x L
  return [effective = std::move(effective), &psi, sparsity](const Eigen::VectorXcd& y) {
    const OmpResult r = omp(effective, y, sparsity);
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(psi.dim());
    for (const int j : r.support) h += r.coefficients(j) * psi.matrix.col(j);
    return h;
  };
}

// Fixed-matrix sweep with OMP recovery through the dictionary.
inline EvalRecord evaluate(const Eigen::MatrixXcd& a, const ChannelSet& data, double snr_db,
                           int sparsity, const Dictionary& psi, const SeededRng& noise_rng,
                           std::size_t snr_index = 0, std::string label = "fixed",
                           int threads = 1) {
  const Estimator est = omp_estimator(a, psi, sparsity);
  EvalRecord rec = evaluate_with_estimator(
      [&a](Eigen::Index) -> const Eigen::MatrixXcd& { return a; },
      [&est](const Eigen::MatrixXcd&) { return est; }, data, snr_db, noise_rng, snr_index,
      std::move(label), threads);
  rec.aux.emplace_back("matrices", "1");
  return rec;
}

// Random constant modulus baseline: a fresh matrix per sample, drawn from
// matrix_rng.at(sample index); the noise discipline matches evaluate so a
// shared noise_rng yields paired comparisons across algorithms.
inline EvalRecord evaluate_random_baseline(const ChannelSet& data, double snr_db, int sparsity,
                                           const Dictionary& psi, int m,
                                           const SeededRng& matrix_rng, const SeededRng& noise_rng,
                                           std::size_t snr_index = 0, std::string label = "random",
                                           int threads = 1) {
  if (m < 1) throw std::invalid_argument("evaluate_random_baseline: m must be positive");
  std::vector<Eigen::MatrixXcd> matrices(static_cast<std::size_t>(data.count()));
  for (Eigen::Index i = 0; i < data.count(); ++i)
    matrices[static_cast<std::size_t>(i)] =
        sample_steinhaus_matrix(m, data.dim(), matrix_rng.at(static_cast<std::uint64_t>(i)));
  EvalRecord rec = evaluate_with_estimator(
      [&matrices](Eigen::Index i) -> const Eigen::MatrixXcd& {
        return matrices[static_cast<std::size_t>(i)];
      },
      [&psi, sparsity](const Eigen::MatrixXcd& a) { return omp_estimator(a, psi, sparsity); },
      data, snr_db, noise_rng, snr_index, std::move(label), threads);
  rec.aux.emplace_back("matrices", std::to_string(data.count()));
  return rec;
}

struct RipReport {
  double delta = 0.0;  // max_i | |A h_i|^2 - 1 |
  double mean = 0.0;   // moments of |A h_i| over the probe set
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

// Isometry quality of A on a per-sample-normalized probe set.
inline RipReport rip_report(const Eigen::MatrixXcd& a, const ChannelSet& probe) {
  if (probe.normalization != Normalization::PerSample)
    throw std::invalid_argument("rip_report: probe must be normalized per sample");
  if (probe.dim() != a.cols()) throw std::invalid_argument("rip_report: dimension mismatch");
  if (probe.count() < 1) throw std::invalid_argument("rip_report: empty probe set");
  std::vector<double> norms(static_cast<std::size_t>(probe.count()));
  RipReport rep;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < probe.count(); ++i) {
    const double nrm = (a * probe.samples.col(i)).norm();
    norms[static_cast<std::size_t>(i)] = nrm;
    sum += nrm;
    rep.delta = std::max(rep.delta, std::abs(nrm * nrm - 1.0));
  }
  std::sort(norms.begin(), norms.end());
  const auto quantile = [&norms](double q) {
    const auto last = norms.size() - 1;
    const auto pos = static_cast<std::size_t>(std::llround(q * static_cast<double>(last)));
    return norms[std::min(pos, last)];
  };
  rep.mean = sum / static_cast<double>(probe.count());
  rep.min = norms.front();
  rep.q25 = quantile(0.25);
  rep.median = quantile(0.5);
  rep.q75 = quantile(0.75);
  rep.max = norms.back();
  return rep;
}

}  // namespace cmsense
