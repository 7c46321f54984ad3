#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "cmsense/kernels.hpp"
#include "cmsense/phase_matrix.hpp"

namespace cmsense {

namespace detail {

// Squared Euclidean distances between columns, computed by direct
// subtraction per pair (no Gram-matrix expansion).
inline Eigen::MatrixXd pairwise_sqdist(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows()) throw std::invalid_argument("pairwise_sqdist: dimension mismatch");
  Eigen::MatrixXd d2(x.cols(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < x.cols(); ++i) d2(i, j) = (x.col(i) - y.col(j)).squaredNorm();
  return d2;
}

// Accumulates the kernel mixture and, if requested, the gradient weight
// w = sum_s exp(-d2/(2 s^2))/s^2, sharing one exponential per bandwidth.
inline void kernel_and_weight(const Eigen::MatrixXd& d2, const KernelSpec& spec,
                              Eigen::MatrixXd* kernel, Eigen::MatrixXd* weight) {
  if (spec.bandwidths.empty()) throw std::invalid_argument("kernel_and_weight: empty KernelSpec");
  if (kernel) kernel->setZero(d2.rows(), d2.cols());
  if (weight) weight->setZero(d2.rows(), d2.cols());
  Eigen::ArrayXXd e;
  for (const double s : spec.bandwidths) {
    const double inv = 1.0 / (2.0 * s * s);
    e = (-d2.array() * inv).exp();
    if (kernel) kernel->array() += e;
    if (weight) weight->array() += e / (s * s);
  }
}

inline double mmd2_from_sums(double sxx, double sxy, double syy, Eigen::Index m_count,
                             Eigen::Index n_count) {
  const double m = static_cast<double>(m_count);
  const double n = static_cast<double>(n_count);
  return sxx / (m * m) - 2.0 * sxy / (m * n) + syy / (n * n);
}

inline Eigen::MatrixXd stack_columns(const Eigen::MatrixXcd& z) {
  Eigen::MatrixXd out(2 * z.rows(), z.cols());
  out.topRows(z.rows()) = z.real();
  out.bottomRows(z.rows()) = z.imag();
  return out;
}

}  // namespace detail

// Biased (V-statistic) squared MMD between two column batches under the
// Gaussian mixture kernel. Includes the diagonal terms, so identical
// batches give exactly zero.
inline double mmd2_biased(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          const KernelSpec& spec) {
  if (x.rows() != y.rows()) throw std::invalid_argument("mmd2_biased: dimension mismatch");
  if (x.cols() < 1 || y.cols() < 1)
    throw std::invalid_argument("mmd2_biased: batches must be non-empty");
  Eigen::MatrixXd k;
  detail::kernel_and_weight(detail::pairwise_sqdist(x, x), spec, &k, nullptr);
  const double sxx = k.sum();
  detail::kernel_and_weight(detail::pairwise_sqdist(x, y), spec, &k, nullptr);
  const double sxy = k.sum();
  detail::kernel_and_weight(detail::pairwise_sqdist(y, y), spec, &k, nullptr);
  const double syy = k.sum();
  return detail::mmd2_from_sums(sxx, sxy, syy, x.cols(), y.cols());
}

// Objective J(Phi): squared MMD between the stacked measurements
// {stack(A(Phi) h_t)} and the stacked sphere targets {stack(u_t)}.
inline double mmd2_objective(const PhaseMatrix& phi, const Eigen::MatrixXcd& channels,
                             const Eigen::MatrixXcd& sphere, const KernelSpec& spec) {
  if (channels.cols() != sphere.cols())
    throw std::invalid_argument("mmd2_objective: channel and sphere batch sizes differ");
  if (channels.cols() < 1) throw std::invalid_argument("mmd2_objective: empty batch");
  if (channels.rows() != phi.dimension())
    throw std::invalid_argument("mmd2_objective: channel dimension mismatch");
  if (sphere.rows() != phi.measurements())
    throw std::invalid_argument("mmd2_objective: sphere dimension mismatch");
  const StackedMap map(phi);
  return mmd2_biased(map.apply_batch(channels), detail::stack_columns(sphere), spec);
}

struct MmdValueGrad {
  double value = 0.0;
  Eigen::MatrixXd gradient;  // m x n, dJ/dPhi
};

// Objective and its analytic gradient with respect to the phases.
//
// Let x_t = stack(A(Phi) h_t), y_t = stack(u_t), T the batch size, and
// w(a,b) = sum_s k_s(a,b)/s^2. The Euclidean gradient of J at x_t is
//   g_t = (-2/T^2) sum_j w(x_t,x_j)(x_t - x_j) + (2/T^2) sum_j w(x_t,y_j)(x_t - y_j),
// and the chain rule through A(Phi) = exp(i Phi)/sqrt(m) gives
//   dJ/dPhi = -Im( A .* (conj(Gc) H^T) ),
// where column t of Gc is the complex form of g_t (top half + i bottom half)
// and column t of H is h_t.
inline MmdValueGrad mmd2_value_and_gradient(const PhaseMatrix& phi,
                                            const Eigen::MatrixXcd& channels,
                                            const Eigen::MatrixXcd& sphere,
                                            const KernelSpec& spec) {
  if (channels.cols() != sphere.cols())
    throw std::invalid_argument("mmd2_value_and_gradient: channel and sphere batch sizes differ");
  if (channels.cols() < 1) throw std::invalid_argument("mmd2_value_and_gradient: empty batch");
  if (channels.rows() != phi.dimension())
    throw std::invalid_argument("mmd2_value_and_gradient: channel dimension mismatch");
  if (sphere.rows() != phi.measurements())
    throw std::invalid_argument("mmd2_value_and_gradient: sphere dimension mismatch");

  const Eigen::Index m = phi.measurements();
  const Eigen::Index t = channels.cols();
  const StackedMap map(phi);
  const Eigen::MatrixXd xb = map.apply_batch(channels);
  const Eigen::MatrixXd yb = detail::stack_columns(sphere);

  Eigen::MatrixXd kxx, wxx, kxy, wxy, kyy;
  detail::kernel_and_weight(detail::pairwise_sqdist(xb, xb), spec, &kxx, &wxx);
  detail::kernel_and_weight(detail::pairwise_sqdist(xb, yb), spec, &kxy, &wxy);
  detail::kernel_and_weight(detail::pairwise_sqdist(yb, yb), spec, &kyy, nullptr);

  MmdValueGrad out;
  out.value = detail::mmd2_from_sums(kxx.sum(), kxy.sum(), kyy.sum(), t, t);

  const Eigen::VectorXd row_xx = wxx.rowwise().sum();
  const Eigen::VectorXd row_xy = wxy.rowwise().sum();
  const double c = 2.0 / (static_cast<double>(t) * static_cast<double>(t));
  const Eigen::MatrixXd g = -c * (xb * row_xx.asDiagonal() - xb * wxx) +
                            c * (xb * row_xy.asDiagonal() - yb * wxy.transpose());

  Eigen::MatrixXcd gc(m, t);
  gc.real() = g.topRows(m);
  gc.imag() = g.bottomRows(m);
  const Eigen::MatrixXcd s = gc.conjugate() * channels.transpose();
  Eigen::MatrixXcd a(m, phi.dimension());
  a.real() = map.cos_part();
  a.imag() = map.sin_part();
  out.gradient = -(a.cwiseProduct(s)).imag();
  return out;
}

inline Eigen::MatrixXd mmd2_gradient_phases(const PhaseMatrix& phi,
                                            const Eigen::MatrixXcd& channels,
                                            const Eigen::MatrixXcd& sphere,
                                            const KernelSpec& spec) {
  return mmd2_value_and_gradient(phi, channels, sphere, spec).gradient;
}

}  // namespace cmsense
