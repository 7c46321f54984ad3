#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace cmsense {

// Phase parameterization of a constant modulus measurement matrix:
// A(Phi)(k,l) = exp(i*Phi(k,l)) / sqrt(m), so every entry has modulus
// 1/sqrt(m) no matter the phases.
struct PhaseMatrix {
  Eigen::MatrixXd phases;  // m x n, radians

  PhaseMatrix() = default;

  explicit PhaseMatrix(Eigen::MatrixXd values) : phases(std::move(values)) {
    if (phases.rows() < 1 || phases.cols() < 1)
      throw std::invalid_argument("PhaseMatrix: dimensions must be positive");
    if (!phases.allFinite())
      throw std::invalid_argument("PhaseMatrix: phases must be finite");
  }

  Eigen::Index measurements() const { return phases.rows(); }  // m
  Eigen::Index dimension() const { return phases.cols(); }     // n
};

inline Eigen::MatrixXcd phases_to_matrix(const PhaseMatrix& phi) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(phi.measurements()));
  Eigen::MatrixXcd a(phi.measurements(), phi.dimension());
  a.real() = scale * phi.phases.array().cos();
  a.imag() = scale * phi.phases.array().sin();
  return a;
}

// stack(z) = [Re(z); Im(z)], an isometry from C^m to R^{2m}.
inline Eigen::VectorXd stack(const Eigen::VectorXcd& z) {
  Eigen::VectorXd out(2 * z.size());
  out.head(z.size()) = z.real();
  out.tail(z.size()) = z.imag();
  return out;
}

// Real form of h -> stack(A(Phi) h). Precomputes cos(Phi)/sqrt(m) and
// sin(Phi)/sqrt(m) once so repeated applications are four real GEMVs:
//   stack(A h) = [C*Re(h) - S*Im(h); S*Re(h) + C*Im(h)].
class StackedMap {
 public:
  explicit StackedMap(const PhaseMatrix& phi) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(phi.measurements()));
    cos_ = scale * phi.phases.array().cos();
    sin_ = scale * phi.phases.array().sin();
  }

  Eigen::Index measurements() const { return cos_.rows(); }
  Eigen::Index dimension() const { return cos_.cols(); }
  const Eigen::MatrixXd& cos_part() const { return cos_; }
  const Eigen::MatrixXd& sin_part() const { return sin_; }

  Eigen::VectorXd apply(const Eigen::VectorXcd& h) const {
    if (h.size() != cos_.cols())
      throw std::invalid_argument("StackedMap::apply: dimension mismatch");
    const Eigen::VectorXd re = h.real();
    const Eigen::VectorXd im = h.imag();
    const Eigen::Index m = cos_.rows();
    Eigen::VectorXd out(2 * m);
    out.head(m) = cos_ * re - sin_ * im;
    out.tail(m) = sin_ * re + cos_ * im;
    return out;
  }

  // Columns of H are inputs; columns of the result are stacked outputs.
  Eigen::MatrixXd apply_batch(const Eigen::MatrixXcd& h) const {
    if (h.rows() != cos_.cols())
      throw std::invalid_argument("StackedMap::apply_batch: dimension mismatch");
    Eigen::MatrixXd out(2 * cos_.rows(), h.cols());
    for (Eigen::Index j = 0; j < h.cols(); ++j) out.col(j) = apply(h.col(j));
    return out;
  }

 private:
  Eigen::MatrixXd cos_, sin_;
};

inline Eigen::VectorXd apply_stacked(const PhaseMatrix& phi, const Eigen::VectorXcd& h) {
  return StackedMap(phi).apply(h);
}

}  // namespace cmsense
