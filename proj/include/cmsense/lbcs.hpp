#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cmsense/channels.hpp"
#include "cmsense/evaluation.hpp"
#include "cmsense/rng.hpp"
#include "cmsense/sampling.hpp"

namespace cmsense {

struct LbcsSelection {
  std::vector<int> selected_rows;  // the m highest-scoring rows, ascending index
  Eigen::VectorXd scores;          // captured energy per candidate row
};

// Score each row r of the candidate basis V by the energy it captures from
// the batch, sum_i |(V h_i)_r|^2, after scaling every sample to unit norm.
// Returns the selection and the subsampled matrix P_Omega V.
inline LbcsSelection lbcs_select(const Eigen::MatrixXcd& v, const ChannelSet& data, int m) {
  if (v.rows() != v.cols()) throw std::invalid_argument("lbcs_select: basis must be square");
  if (v.rows() != data.dim()) throw std::invalid_argument("lbcs_select: dimension mismatch");
  if (m < 1 || m > v.rows())
    throw std::invalid_argument("lbcs_select: need 1 <= m <= n");
  if (data.count() < 1) throw std::invalid_argument("lbcs_select: empty data set");

  const Eigen::Index n = v.rows();
  Eigen::MatrixXcd h = data.samples;
  for (Eigen::Index i = 0; i < h.cols(); ++i) {
    const double nrm = h.col(i).norm();
    if (nrm == 0.0)
      throw std::domain_error("lbcs_select: zero-norm sample at index " + std::to_string(i));
    h.col(i) /= nrm;
  }

  LbcsSelection sel;
  sel.scores = (v * h).rowwise().squaredNorm();

  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return sel.scores(a) > sel.scores(b); });
  sel.selected_rows.assign(idx.begin(), idx.begin() + m);
  std::sort(sel.selected_rows.begin(), sel.selected_rows.end());
  return sel;
}

inline Eigen::MatrixXcd select_rows(const Eigen::MatrixXcd& v, const std::vector<int>& rows) {
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(rows.size()), v.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= v.rows())
      throw std::invalid_argument("select_rows: row index out of range");
    out.row(static_cast<Eigen::Index>(k)) = v.row(rows[k]);
  }
  return out;
}

// Force constant modulus: divide each entry by its modulus, then scale each
// row to unit norm (entries end up with modulus 1/sqrt(n)).
inline Eigen::MatrixXcd constant_modulus_project(const Eigen::MatrixXcd& v) {
  Eigen::MatrixXcd out(v.rows(), v.cols());
  for (Eigen::Index c = 0; c < v.cols(); ++c)
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double a = std::abs(v(r, c));
      if (a == 0.0)
        throw std::domain_error("constant_modulus_project: zero entry at (" + std::to_string(r) +
                                ", " + std::to_string(c) + ")");
      out(r, c) = v(r, c) / a;
    }
  for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) /= out.row(r).norm();
  return out;
}

struct McLbcsResult {
  Eigen::MatrixXcd matrix;  // m x n, best candidate
  double best_mse = 0.0;
  int best_index = -1;
  std::vector<double> candidate_mses;
};

// Monte-Carlo search for a constant modulus subsampled basis: draw a random
// unitary, force constant modulus, pick the m most energetic rows on the
// training data, and keep the candidate with the lowest validation MSE at
// the given SNR. Candidate i uses rng.stream("unitary").at(i); all
// candidates share one validation noise stream, so the comparison is paired.
inline McLbcsResult mc_lbcs(const ChannelSet& train, const ChannelSet& val, double snr_db, int m,
                            int iterations, int sparsity, const Dictionary& psi, SeededRng rng,
                            int threads = 1) {
  if (iterations < 1) throw std::invalid_argument("mc_lbcs: iterations must be positive");
  if (train.dim() != val.dim()) throw std::invalid_argument("mc_lbcs: dimension mismatch");
  const SeededRng unitary_rng = rng.stream("unitary");
  const SeededRng noise_rng = rng.stream("noise");

  McLbcsResult result;
  result.candidate_mses.reserve(static_cast<std::size_t>(iterations));
  for (int i = 0; i < iterations; ++i) {
    const Eigen::MatrixXcd u = random_unitary(train.dim(),
                                              unitary_rng.at(static_cast<std::uint64_t>(i)));
    const Eigen::MatrixXcd projected = constant_modulus_project(u);
    const LbcsSelection sel = lbcs_select(projected, train, m);
    Eigen::MatrixXcd candidate = select_rows(projected, sel.selected_rows);
    const EvalRecord rec =
        evaluate(candidate, val, snr_db, sparsity, psi, noise_rng, 0, "mc-lbcs", threads);
    result.candidate_mses.push_back(rec.relative_mse);
    if (result.best_index < 0 || rec.relative_mse < result.best_mse) {
      result.best_mse = rec.relative_mse;
      result.best_index = i;
      result.matrix = std::move(candidate);
    }
  }
  return result;
}

}  // namespace cmsense
