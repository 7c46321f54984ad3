#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cmsense {

// Bandwidths of a Gaussian mixture kernel k(x,y) = sum_s exp(-|x-y|^2/(2 s^2)).
struct KernelSpec {
  std::vector<double> bandwidths;

  KernelSpec() = default;
  explicit KernelSpec(std::vector<double> sigmas) : bandwidths(std::move(sigmas)) {
    if (bandwidths.empty()) throw std::invalid_argument("KernelSpec: need at least one bandwidth");
    for (const double s : bandwidths)
      if (!(s > 0.0) || !std::isfinite(s))
        throw std::invalid_argument("KernelSpec: bandwidths must be positive and finite");
  }

  static KernelSpec default_mixture() { return KernelSpec({2, 5, 10, 20, 40, 80}); }
};

inline double gaussian_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double sigma) {
  if (x.size() != y.size()) throw std::invalid_argument("gaussian_kernel: dimension mismatch");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

inline double mixture_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             const KernelSpec& spec) {
  if (x.size() != y.size()) throw std::invalid_argument("mixture_kernel: dimension mismatch");
  if (spec.bandwidths.empty()) throw std::invalid_argument("mixture_kernel: empty KernelSpec");
  const double d2 = (x - y).squaredNorm();
  double sum = 0.0;
  for (const double s : spec.bandwidths) sum += std::exp(-d2 / (2.0 * s * s));
  return sum;
}

}  // namespace cmsense
