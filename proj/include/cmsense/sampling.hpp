#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "cmsense/rng.hpp"

namespace cmsense {

// Haar-distributed random unitary: QR of an i.i.d. complex Gaussian matrix
// with the columns of Q rephased by R(j,j)/|R(j,j)| so the factorization is
// the one with positive-real R diagonal.
inline Eigen::MatrixXcd random_unitary(Eigen::Index n, SeededRng rng) {
  if (n < 1) throw std::invalid_argument("random_unitary: n must be positive");
  for (;;) {
    Eigen::MatrixXcd g(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = 0; r < n; ++r) g(r, c) = rng.cgauss(1.0);
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd r = qr.matrixQR();
    bool ok = true;
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::complex<double> d = r(j, j);
      const double a = std::abs(d);
      if (a == 0.0) {
        ok = false;  // measure-zero degenerate draw, resample
        break;
      }
      q.col(j) *= d / a;
    }
    if (ok) return q;
  }
}

// Uniform points on the complex unit sphere in C^m, one per column.
inline Eigen::MatrixXcd sample_sphere(Eigen::Index m, Eigen::Index count, SeededRng rng) {
  if (m < 1) throw std::invalid_argument("sample_sphere: m must be positive");
  if (count < 0) throw std::invalid_argument("sample_sphere: count must be nonnegative");
  Eigen::MatrixXcd out(m, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    double nrm = 0.0;
    do {
      for (Eigen::Index i = 0; i < m; ++i) out(i, j) = rng.cgauss(1.0);
      nrm = out.col(j).norm();
    } while (nrm == 0.0);
    out.col(j) /= nrm;
  }
  return out;
}

// Random constant modulus matrix: entries exp(i*phi)/sqrt(m) with phases
// i.i.d. uniform on [0, 2*pi).
inline Eigen::MatrixXcd sample_steinhaus_matrix(Eigen::Index m, Eigen::Index n, SeededRng rng) {
  if (m < 1 || n < 1)
    throw std::invalid_argument("sample_steinhaus_matrix: dimensions must be positive");
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Eigen::MatrixXcd a(m, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < m; ++r)
      a(r, c) = std::polar(scale, 2.0 * std::numbers::pi * rng.uniform());
  return a;
}

}  // namespace cmsense
