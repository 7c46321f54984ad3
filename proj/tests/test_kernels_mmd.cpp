#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "cmsense/mmd.hpp"
#include "cmsense/phase_matrix.hpp"
#include "cmsense/rng.hpp"

using namespace cmsense;

namespace {

Eigen::MatrixXd random_real(SeededRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = rng.gauss();
  return out;
}

Eigen::MatrixXcd random_complex(SeededRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXcd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = rng.cgauss(1.0);
  return out;
}

}  // namespace

TEST_CASE("gaussian kernel point values", "[mmd]") {
  Eigen::VectorXd x(2), y(2);
  x << 0.0, 0.0;
  y << 1.0, 1.0;
  CHECK(gaussian_kernel(x, x, 3.0) == 1.0);
  CHECK(std::abs(gaussian_kernel(x, y, 1.0) - std::exp(-1.0)) <= 1e-16);
  CHECK(std::abs(gaussian_kernel(x, y, 2.0) - std::exp(-0.25)) <= 1e-16);
  CHECK_THROWS_AS(gaussian_kernel(x, y, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_kernel(x, Eigen::VectorXd::Zero(3), 1.0), std::invalid_argument);
}

TEST_CASE("mixture kernel sums the bandwidth terms", "[mmd]") {
  const KernelSpec spec = KernelSpec::default_mixture();
  REQUIRE(spec.bandwidths.size() == 6);
  Eigen::VectorXd x(3), y(3);
  x << 0.5, -1.0, 2.0;
  y << 0.0, 0.25, -0.75;
  double expected = 0.0;
  for (const double s : spec.bandwidths) expected += gaussian_kernel(x, y, s);
  CHECK(std::abs(mixture_kernel(x, y, spec) - expected) <= 1e-15);
  CHECK(mixture_kernel(x, x, spec) == 6.0);
  CHECK_THROWS_AS(KernelSpec(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec(std::vector<double>{1.0, -2.0}), std::invalid_argument);
}

TEST_CASE("mmd2_biased of a batch with itself is exactly zero", "[mmd]") {
  const KernelSpec spec = KernelSpec::default_mixture();
  SeededRng rng(41, "self");
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::MatrixXd x = random_real(rng, 6, 9);
    CHECK(mmd2_biased(x, x, spec) == 0.0);
  }
}

TEST_CASE("mmd2_biased is symmetric and nonnegative", "[mmd]") {
  const KernelSpec spec = KernelSpec::default_mixture();
  SeededRng rng(43, "sym");
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::MatrixXd x = random_real(rng, 4, 7);
    const Eigen::MatrixXd y = random_real(rng, 4, 5);
    const double fwd = mmd2_biased(x, y, spec);
    const double rev = mmd2_biased(y, x, spec);
    CHECK(std::abs(fwd - rev) <= 1e-12);
    CHECK(fwd >= -1e-12);
  }
}

TEST_CASE("mmd2_biased single-point closed form", "[mmd]") {
  const KernelSpec spec = KernelSpec::default_mixture();
  Eigen::MatrixXd x(2, 1), y(2, 1);
  x << 0.0, 0.0;
  y << 1.0, 1.0;
  double cross = 0.0;
  for (const double s : spec.bandwidths) cross += std::exp(-1.0 / (s * s));
  const double expected = 2.0 * 6.0 - 2.0 * cross;
  CHECK(std::abs(mmd2_biased(x, y, spec) - expected) <= 1e-13);
  CHECK(std::abs(mmd2_biased(x, y, spec) -
                 (mixture_kernel(x.col(0), x.col(0), spec) -
                  2.0 * mixture_kernel(x.col(0), y.col(0), spec) +
                  mixture_kernel(y.col(0), y.col(0), spec))) <= 1e-15);
}

TEST_CASE("mmd2_biased separates distant batches from near ones", "[mmd]") {
  const KernelSpec spec = KernelSpec::default_mixture();
  SeededRng rng(45, "sep");
  const Eigen::MatrixXd base = random_real(rng, 4, 40);
  const Eigen::MatrixXd near = base + 0.01 * random_real(rng, 4, 40);
  const Eigen::MatrixXd far = base.array() + 10.0;
  CHECK(mmd2_biased(base, near, spec) < mmd2_biased(base, far, spec));
}

TEST_CASE("mmd2_objective composes the stacked pipeline", "[mmd]") {
  const KernelSpec spec = KernelSpec::default_mixture();
  SeededRng rng(47, "obj");
  const Eigen::Index m = 3, n = 6, t = 8;
  Eigen::MatrixXd phases(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) phases(i, j) = rng.uniform(0.0, 6.283185307179586);
  const PhaseMatrix phi(phases);
  const Eigen::MatrixXcd channels = random_complex(rng, n, t);
  const Eigen::MatrixXcd sphere = random_complex(rng, m, t);

  const Eigen::MatrixXcd a = phases_to_matrix(phi);
  Eigen::MatrixXd xb(2 * m, t), yb(2 * m, t);
  const Eigen::MatrixXcd ah = a * channels;
  xb.topRows(m) = ah.real();
  xb.bottomRows(m) = ah.imag();
  yb.topRows(m) = sphere.real();
  yb.bottomRows(m) = sphere.imag();

  const double composed = mmd2_objective(phi, channels, sphere, spec);
  CHECK(std::abs(composed - mmd2_biased(xb, yb, spec)) <= 1e-14);
  CHECK_THROWS_AS(mmd2_objective(phi, channels, random_complex(rng, m, t + 1), spec),
                  std::invalid_argument);
  CHECK_THROWS_AS(mmd2_objective(phi, random_complex(rng, n + 1, t), sphere, spec),
                  std::invalid_argument);
}

TEST_CASE("value_and_gradient value equals the plain objective", "[mmd]") {
  const KernelSpec spec = KernelSpec::default_mixture();
  SeededRng rng(49, "val");
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::Index m = 4, n = 8, t = 10;
    Eigen::MatrixXd phases(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < m; ++i) phases(i, j) = rng.uniform(0.0, 6.283185307179586);
    const PhaseMatrix phi(phases);
    const Eigen::MatrixXcd channels = random_complex(rng, n, t);
    const Eigen::MatrixXcd sphere = random_complex(rng, m, t);
    const MmdValueGrad vg = mmd2_value_and_gradient(phi, channels, sphere, spec);
    CHECK(vg.value == mmd2_objective(phi, channels, sphere, spec));
    CHECK(vg.gradient.rows() == m);
    CHECK(vg.gradient.cols() == n);
  }
}

TEST_CASE("analytic gradient matches central finite differences", "[mmd]") {
  const KernelSpec spec = KernelSpec::default_mixture();
  SeededRng rng(51, "fd");
  const Eigen::Index m = 3, n = 5, t = 7;
  const double step = 1e-4;
  for (int rep = 0; rep < 4; ++rep) {
    Eigen::MatrixXd phases(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < m; ++i) phases(i, j) = rng.uniform(0.0, 6.283185307179586);
    const Eigen::MatrixXcd channels = random_complex(rng, n, t);
    const Eigen::MatrixXcd sphere = random_complex(rng, m, t);
    const Eigen::MatrixXd analytic =
        mmd2_gradient_phases(PhaseMatrix(phases), channels, sphere, spec);

    Eigen::MatrixXd numeric(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::MatrixXd plus = phases, minus = phases;
        plus(i, j) += step;
        minus(i, j) -= step;
        numeric(i, j) = (mmd2_objective(PhaseMatrix(plus), channels, sphere, spec) -
                         mmd2_objective(PhaseMatrix(minus), channels, sphere, spec)) /
                        (2.0 * step);
      }
    const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-12);
    CHECK((analytic - numeric).cwiseAbs().maxCoeff() / scale <= 1e-5);
  }
}

TEST_CASE("gradient moves the objective downhill", "[mmd]") {
  const KernelSpec spec = KernelSpec::default_mixture();
  SeededRng rng(53, "down");
  const Eigen::Index m = 2, n = 6, t = 12;
  Eigen::MatrixXd phases(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) phases(i, j) = rng.uniform(0.0, 6.283185307179586);
  const Eigen::MatrixXcd channels = random_complex(rng, n, t);
  const Eigen::MatrixXcd sphere = random_complex(rng, m, t);
  const MmdValueGrad vg = mmd2_value_and_gradient(PhaseMatrix(phases), channels, sphere, spec);
  const Eigen::MatrixXd stepped = phases - 1e-3 * vg.gradient;
  if (vg.gradient.norm() > 1e-10)
    CHECK(mmd2_objective(PhaseMatrix(stepped), channels, sphere, spec) < vg.value);
}
