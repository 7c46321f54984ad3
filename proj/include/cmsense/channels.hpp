#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmsense/rng.hpp"

namespace cmsense {

enum class ChannelModel { CanonicalSparse, DftSparse, Multipath };

inline std::string to_string(ChannelModel m) {
  switch (m) {
    case ChannelModel::CanonicalSparse: return "canonical-sparse";
    case ChannelModel::DftSparse: return "dft-sparse";
    case ChannelModel::Multipath: return "multipath";
  }
  throw std::invalid_argument("to_string: unknown channel model");
}

inline ChannelModel channel_model_from_string(const std::string& s) {
  if (s == "canonical-sparse") return ChannelModel::CanonicalSparse;
  if (s == "dft-sparse") return ChannelModel::DftSparse;
  if (s == "multipath") return ChannelModel::Multipath;
  throw std::invalid_argument("unknown channel model: " + s);
}

// Which sparsifying system a model uses and at what size.
struct ChannelModelSpec {
  ChannelModel model = ChannelModel::CanonicalSparse;
  int n = 0;  // ambient dimension
  int p = 0;  // sparsity / number of paths
  int L = 0;  // dictionary grid size; multipath only, 0 means 16*n

  int grid_size() const {
    if (model != ChannelModel::Multipath) return n;
    return L > 0 ? L : 16 * n;
  }
};

inline void validate(const ChannelModelSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("ChannelModelSpec: n must be positive");
  if (spec.p < 1) throw std::invalid_argument("ChannelModelSpec: p must be positive");
  if (spec.p > spec.n && spec.model != ChannelModel::Multipath)
    throw std::invalid_argument("ChannelModelSpec: p must not exceed n");
  if (spec.model == ChannelModel::Multipath && spec.L < 0)
    throw std::invalid_argument("ChannelModelSpec: L must be nonnegative");
  if (spec.model == ChannelModel::Multipath && spec.p > spec.grid_size())
    throw std::invalid_argument("ChannelModelSpec: p must not exceed the grid size");
}

enum class Normalization { Raw, PerSample, Average };

inline std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::Raw: return "raw";
    case Normalization::PerSample: return "per-sample";
    case Normalization::Average: return "average";
  }
  throw std::invalid_argument("to_string: unknown normalization");
}

inline Normalization normalization_from_string(const std::string& s) {
  if (s == "raw") return Normalization::Raw;
  if (s == "per-sample") return Normalization::PerSample;
  if (s == "average") return Normalization::Average;
  throw std::invalid_argument("unknown normalization: " + s);
}

// A batch of channel vectors, one per column, plus enough bookkeeping to
// rebuild the matching dictionary and to track which normalization has been
// applied.
struct ChannelSet {
  Eigen::MatrixXcd samples;  // n x count
  ChannelModelSpec model;
  Normalization normalization = Normalization::Raw;

  Eigen::Index dim() const { return samples.rows(); }
  Eigen::Index count() const { return samples.cols(); }
};

// Array steering vector a(theta) = (1/sqrt(n)) [1, e^{i theta}, ..., e^{i (n-1) theta}]^T.
inline Eigen::VectorXcd steering_vector(double theta, int n) {
  if (n < 1) throw std::invalid_argument("steering_vector: n must be positive");
  if (!std::isfinite(theta)) throw std::invalid_argument("steering_vector: theta must be finite");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::VectorXcd a(n);
  for (int k = 0; k < n; ++k) a(k) = std::polar(scale, k * theta);
  return a;
}

enum class DictionaryKind { Identity, Dft, SteeringGrid };

struct Dictionary {
  Eigen::MatrixXcd matrix;  // n x L, unit-norm columns
  DictionaryKind kind = DictionaryKind::Identity;
  Eigen::VectorXd grid_angles;  // SteeringGrid only

  Eigen::Index dim() const { return matrix.rows(); }
  Eigen::Index atoms() const { return matrix.cols(); }
};

inline Dictionary identity_dictionary(int n) {
  if (n < 1) throw std::invalid_argument("identity_dictionary: n must be positive");
  Dictionary d;
  d.matrix = Eigen::MatrixXcd::Identity(n, n);
  d.kind = DictionaryKind::Identity;
  return d;
}

// Unitary DFT, F(k,l) = exp(2*pi*i*k*l/n)/sqrt(n). The product k*l is
// reduced mod n before forming the angle.
inline Eigen::MatrixXcd dft_matrix(int n) {
  if (n < 1) throw std::invalid_argument("dft_matrix: n must be positive");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXcd f(n, n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      f(k, l) = std::polar(scale, 2.0 * std::numbers::pi *
                                      static_cast<double>((static_cast<long long>(k) * l) % n) /
                                      static_cast<double>(n));
  return f;
}

inline Dictionary dft_dictionary(int n) {
  Dictionary d;
  d.matrix = dft_matrix(n);
  d.kind = DictionaryKind::Dft;
  return d;
}

// Steering dictionary over the uniform angle grid theta_l = 2*pi*l/L.
inline Dictionary build_dictionary(int n, int L) {
  if (n < 1) throw std::invalid_argument("build_dictionary: n must be positive");
  if (L < 1) throw std::invalid_argument("build_dictionary: L must be positive");
  Dictionary d;
  d.kind = DictionaryKind::SteeringGrid;
  d.matrix.resize(n, L);
  d.grid_angles.resize(L);
  for (int l = 0; l < L; ++l) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(l) / static_cast<double>(L);
    d.grid_angles(l) = theta;
    d.matrix.col(l) = steering_vector(theta, n);
  }
  return d;
}

inline Dictionary dictionary_for_model(const ChannelModelSpec& spec) {
  validate(spec);
  switch (spec.model) {
    case ChannelModel::CanonicalSparse: return identity_dictionary(spec.n);
    case ChannelModel::DftSparse: return dft_dictionary(spec.n);
    case ChannelModel::Multipath: return build_dictionary(spec.n, spec.grid_size());
  }
  throw std::invalid_argument("dictionary_for_model: unknown channel model");
}

// Superposition of steering vectors: h = sum_k gains(k) * a(angles(k)).
inline Eigen::VectorXcd multipath_channel(const Eigen::VectorXcd& gains,
                                          const Eigen::VectorXd& angles, int n) {
  if (gains.size() != angles.size())
    throw std::invalid_argument("multipath_channel: gains/angles size mismatch");
  if (gains.size() < 1) throw std::invalid_argument("multipath_channel: need at least one path");
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index k = 0; k < gains.size(); ++k)
    h += gains(k) * steering_vector(angles(k), n);
  return h;
}

namespace detail {

// Sparse coefficient draw shared by the canonical and DFT models: p distinct
// positions, gains i.i.d. CN(0, 1/p). Sample i uses substream rng.at(i), so
// prefixes of a batch do not depend on the requested count.
inline void sparse_coefficients(const ChannelModelSpec& spec, SeededRng sample_rng,
                                std::vector<int>& support, Eigen::VectorXcd& gains) {
  support = sample_rng.sample_without_replacement(spec.n, spec.p);
  gains.resize(spec.p);
  const double var = 1.0 / static_cast<double>(spec.p);
  for (int k = 0; k < spec.p; ++k) gains(k) = sample_rng.cgauss(var);
}

}  // namespace detail

// h has p nonzero entries at uniformly random positions, values CN(0, 1/p).
inline ChannelSet gen_canonical_sparse(const ChannelModelSpec& spec, Eigen::Index count,
                                       SeededRng rng) {
  validate(spec);
  if (spec.model != ChannelModel::CanonicalSparse)
    throw std::invalid_argument("gen_canonical_sparse: spec.model mismatch");
  if (count < 0) throw std::invalid_argument("gen_canonical_sparse: count must be nonnegative");
  ChannelSet set;
  set.model = spec;
  set.samples = Eigen::MatrixXcd::Zero(spec.n, count);
  std::vector<int> support;
  Eigen::VectorXcd gains;
  for (Eigen::Index i = 0; i < count; ++i) {
    detail::sparse_coefficients(spec, rng.at(static_cast<std::uint64_t>(i)), support, gains);
    for (int k = 0; k < spec.p; ++k) set.samples(support[static_cast<std::size_t>(k)], i) = gains(k);
  }
  return set;
}

// h = F s with F the unitary DFT and s drawn as in the canonical model.
inline ChannelSet gen_dft_sparse(const ChannelModelSpec& spec, Eigen::Index count, SeededRng rng) {
  validate(spec);
  if (spec.model != ChannelModel::DftSparse)
    throw std::invalid_argument("gen_dft_sparse: spec.model mismatch");
  if (count < 0) throw std::invalid_argument("gen_dft_sparse: count must be nonnegative");
  const Eigen::MatrixXcd f = dft_matrix(spec.n);
  ChannelSet set;
  set.model = spec;
  set.samples = Eigen::MatrixXcd::Zero(spec.n, count);
  std::vector<int> support;
  Eigen::VectorXcd gains;
  for (Eigen::Index i = 0; i < count; ++i) {
    detail::sparse_coefficients(spec, rng.at(static_cast<std::uint64_t>(i)), support, gains);
    for (int k = 0; k < spec.p; ++k)
      set.samples.col(i) += gains(k) * f.col(support[static_cast<std::size_t>(k)]);
  }
  return set;
}

// p paths with angles uniform on [0, 2*pi) (off-grid) and gains CN(0, 1/p).
inline ChannelSet gen_multipath(const ChannelModelSpec& spec, Eigen::Index count, SeededRng rng) {
  validate(spec);
  if (spec.model != ChannelModel::Multipath)
    throw std::invalid_argument("gen_multipath: spec.model mismatch");
  if (count < 0) throw std::invalid_argument("gen_multipath: count must be nonnegative");
  ChannelSet set;
  set.model = spec;
  set.samples.resize(spec.n, count);
  Eigen::VectorXd angles(spec.p);
  Eigen::VectorXcd gains(spec.p);
  const double var = 1.0 / static_cast<double>(spec.p);
  for (Eigen::Index i = 0; i < count; ++i) {
    SeededRng r = rng.at(static_cast<std::uint64_t>(i));
    for (int k = 0; k < spec.p; ++k) angles(k) = 2.0 * std::numbers::pi * r.uniform();
    for (int k = 0; k < spec.p; ++k) gains(k) = r.cgauss(var);
    set.samples.col(i) = multipath_channel(gains, angles, spec.n);
  }
  return set;
}

inline ChannelSet generate_channels(const ChannelModelSpec& spec, Eigen::Index count,
                                    SeededRng rng) {
  switch (spec.model) {
    case ChannelModel::CanonicalSparse: return gen_canonical_sparse(spec, count, rng);
    case ChannelModel::DftSparse: return gen_dft_sparse(spec, count, rng);
    case ChannelModel::Multipath: return gen_multipath(spec, count, rng);
  }
  throw std::invalid_argument("generate_channels: unknown channel model");
}

// Scale every sample to unit norm. Errors name the first offending sample.
inline ChannelSet normalize_per_sample(ChannelSet set) {
  if (set.normalization == Normalization::PerSample) return set;
  if (set.normalization != Normalization::Raw)
    throw std::invalid_argument("normalize_per_sample: set already normalized differently");
  for (Eigen::Index i = 0; i < set.count(); ++i) {
    const double nrm = set.samples.col(i).norm();
    if (nrm == 0.0)
      throw std::domain_error("normalize_per_sample: zero-norm sample at index " +
                              std::to_string(i));
    set.samples.col(i) /= nrm;
  }
  set.normalization = Normalization::PerSample;
  return set;
}

// Scale the whole batch by 1/sqrt(mean squared norm).
inline ChannelSet normalize_average(ChannelSet set) {
  if (set.normalization == Normalization::Average) return set;
  if (set.normalization != Normalization::Raw)
    throw std::invalid_argument("normalize_average: set already normalized differently");
  if (set.count() < 1) throw std::invalid_argument("normalize_average: empty set");
  const double mean_sq = set.samples.squaredNorm() / static_cast<double>(set.count());
  if (mean_sq == 0.0) throw std::domain_error("normalize_average: all samples are zero");
  set.samples /= std::sqrt(mean_sq);
  set.normalization = Normalization::Average;
  return set;
}

inline ChannelSet apply_normalization(ChannelSet set, Normalization target) {
  switch (target) {
    case Normalization::Raw:
      if (set.normalization != Normalization::Raw)
        throw std::invalid_argument("apply_normalization: cannot undo a normalization");
      return set;
    case Normalization::PerSample: return normalize_per_sample(std::move(set));
    case Normalization::Average: return normalize_average(std::move(set));
  }
  throw std::invalid_argument("apply_normalization: unknown normalization");
}

}  // namespace cmsense
