#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <stdexcept>
#include <vector>

namespace cmsense {

struct OmpResult {
  Eigen::VectorXcd coefficients;  // length L, zero off the support
  std::vector<int> support;       // atoms in selection order
  double residual_norm = 0.0;
  bool rank_deficient = false;
};

struct OmpOptions {
  // Score atoms by |<c_j, r>| / |c_j| instead of plain |<c_j, r>|.
  bool normalize_columns = false;
  // Stop once the residual falls below this fraction of |y|.
  double residual_tol = 1e-13;
};

// Orthogonal matching pursuit: greedily pick the atom with the largest
// correlation modulus against the residual (ties to the lowest index), then
// refit all selected coefficients by least squares on the support.
inline OmpResult omp(const Eigen::MatrixXcd& c, const Eigen::VectorXcd& y, int sparsity,
                     const OmpOptions& options = {}) {
  const Eigen::Index m = c.rows();
  const Eigen::Index l = c.cols();
  if (y.size() != m) throw std::invalid_argument("omp: measurement length mismatch");
  if (sparsity < 1) throw std::invalid_argument("omp: sparsity must be positive");
  if (sparsity > m || sparsity > l)
    throw std::invalid_argument("omp: sparsity must not exceed min(rows, atoms)");

  OmpResult result;
  result.coefficients = Eigen::VectorXcd::Zero(l);
  const double y_norm = y.norm();
  result.residual_norm = y_norm;
  if (y_norm == 0.0) return result;

  Eigen::VectorXd col_scale;
  if (options.normalize_columns) {
    col_scale = c.colwise().norm();
    for (Eigen::Index j = 0; j < l; ++j)
      if (col_scale(j) == 0.0) col_scale(j) = 1.0;  // zero atoms score zero anyway
  }

  Eigen::VectorXcd residual = y;
  Eigen::MatrixXcd selected(m, sparsity);
  Eigen::VectorXcd fit;
  std::vector<char> used(static_cast<std::size_t>(l), 0);

  for (int step = 0; step < sparsity; ++step) {
    if (result.residual_norm <= options.residual_tol * y_norm) break;

    Eigen::VectorXd score = (c.adjoint() * residual).cwiseAbs();
    if (options.normalize_columns) score.array() /= col_scale.array();
    Eigen::Index best = -1;
    double best_score = -1.0;
    for (Eigen::Index j = 0; j < l; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if (score(j) > best_score) {
        best_score = score(j);
        best = j;
      }
    }
    if (best < 0) break;

    used[static_cast<std::size_t>(best)] = 1;
    result.support.push_back(static_cast<int>(best));
    selected.col(step) = c.col(best);

    const auto active = selected.leftCols(step + 1);
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(active);
    if (cod.rank() < step + 1) result.rank_deficient = true;
    fit = cod.solve(y);
    residual = y - active * fit;
    result.residual_norm = residual.norm();
  }

  for (std::size_t k = 0; k < result.support.size(); ++k)
    result.coefficients(result.support[k]) = fit(static_cast<Eigen::Index>(k));
  return result;
}

}  // namespace cmsense
