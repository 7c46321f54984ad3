#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace cmsense {

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

struct AdamState {
  Eigen::MatrixXd first_moment;
  Eigen::MatrixXd second_moment;
  int step = 0;  // completed updates

  static AdamState zero(Eigen::Index rows, Eigen::Index cols) {
    AdamState s;
    s.first_moment = Eigen::MatrixXd::Zero(rows, cols);
    s.second_moment = Eigen::MatrixXd::Zero(rows, cols);
    return s;
  }
};

// One adaptive moment estimation update with bias correction. Mutates the
// parameters and the state; the step counter advances even for a zero
// gradient (which leaves the parameters bit-identical).
inline void adaptive_moment_step(Eigen::MatrixXd& params, const Eigen::MatrixXd& gradient,
                                 AdamState& state, double lr_effective) {
  if (gradient.rows() != params.rows() || gradient.cols() != params.cols())
    throw std::invalid_argument("adaptive_moment_step: gradient shape mismatch");
  if (state.first_moment.rows() != params.rows() || state.first_moment.cols() != params.cols() ||
      state.second_moment.rows() != params.rows() || state.second_moment.cols() != params.cols())
    throw std::invalid_argument("adaptive_moment_step: state shape mismatch");
  if (!gradient.allFinite())
    throw std::runtime_error("adaptive_moment_step: non-finite gradient at step " +
                             std::to_string(state.step + 1));
  if (!(lr_effective >= 0.0) || !std::isfinite(lr_effective))
    throw std::invalid_argument("adaptive_moment_step: learning rate must be finite and >= 0");

  const int t = state.step + 1;
  state.first_moment = kAdamBeta1 * state.first_moment + (1.0 - kAdamBeta1) * gradient;
  state.second_moment = (kAdamBeta2 * state.second_moment.array() +
                         (1.0 - kAdamBeta2) * gradient.array().square())
                            .matrix();
  const double corr1 = 1.0 - std::pow(kAdamBeta1, t);
  const double corr2 = 1.0 - std::pow(kAdamBeta2, t);
  const Eigen::ArrayXXd m_hat = state.first_moment.array() / corr1;
  const Eigen::ArrayXXd v_hat = state.second_moment.array() / corr2;
  params.array() -= lr_effective * m_hat / (v_hat.sqrt() + kAdamEpsilon);
  state.step = t;
}

}  // namespace cmsense
