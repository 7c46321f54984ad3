#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "cmsense/phase_matrix.hpp"
#include "cmsense/rng.hpp"

using namespace cmsense;

namespace {

Eigen::MatrixXd random_phases(Eigen::Index m, Eigen::Index n, SeededRng& rng) {
  Eigen::MatrixXd phi(m, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < m; ++r) phi(r, c) = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return phi;
}

Eigen::VectorXcd random_cvector(Eigen::Index n, SeededRng& rng) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.cgauss(1.0);
  return v;
}

}  // namespace

TEST_CASE("zero phases give the all-real constant entry", "[phase_matrix]") {
  const PhaseMatrix phi(Eigen::MatrixXd::Zero(2, 3));
  const Eigen::MatrixXcd a = phases_to_matrix(phi);
  const double expected = 1.0 / std::sqrt(2.0);
  for (Eigen::Index r = 0; r < 2; ++r)
    for (Eigen::Index c = 0; c < 3; ++c) {
      CHECK(a(r, c).real() == expected);
      CHECK(a(r, c).imag() == 0.0);
    }
}

TEST_CASE("quarter-turn phase with m=1 gives the unit imaginary", "[phase_matrix]") {
  Eigen::MatrixXd p(1, 1);
  p(0, 0) = std::numbers::pi / 2.0;
  const Eigen::MatrixXcd a = phases_to_matrix(PhaseMatrix(p));
  CHECK(std::abs(a(0, 0) - std::complex<double>(0.0, 1.0)) < 1e-15);
}

TEST_CASE("entries keep modulus 1/sqrt(m) for random phases", "[phase_matrix]") {
  SeededRng rng(42, "modulus");
  const PhaseMatrix phi(random_phases(4, 8, rng));
  const Eigen::MatrixXcd a = phases_to_matrix(phi);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      worst = std::max(worst, std::abs(std::abs(a(r, c)) - 0.5));
  CHECK(worst <= 1e-15);
}

TEST_CASE("stack splits real and imaginary parts", "[phase_matrix]") {
  Eigen::VectorXcd z(1);
  z << std::complex<double>(1.0, 2.0);
  const Eigen::VectorXd s = stack(z);
  REQUIRE(s.size() == 2);
  CHECK(s(0) == 1.0);
  CHECK(s(1) == 2.0);

  Eigen::VectorXcd z2(2);
  z2 << std::complex<double>(0.0, 1.0), std::complex<double>(-1.0, 0.0);
  const Eigen::VectorXd s2 = stack(z2);
  REQUIRE(s2.size() == 4);
  CHECK(s2(0) == 0.0);
  CHECK(s2(1) == -1.0);
  CHECK(s2(2) == 1.0);
  CHECK(s2(3) == 0.0);
}

TEST_CASE("stack preserves norms and real-linear structure", "[phase_matrix]") {
  SeededRng rng(7, "stack");
  const Eigen::VectorXcd z = random_cvector(5, rng);
  const Eigen::VectorXcd w = random_cvector(5, rng);
  CHECK(std::abs(stack(z).norm() - z.norm()) <= 1e-15);
  const double alpha = 1.75;
  CHECK((stack(z + w) - (stack(z) + stack(w))).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((stack(alpha * z) - alpha * stack(z)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("apply_stacked matches the complex product on trivial cases", "[phase_matrix]") {
  const PhaseMatrix phi(Eigen::MatrixXd::Zero(1, 1));
  Eigen::VectorXcd h(1);
  h << std::complex<double>(1.0, 0.0);
  Eigen::VectorXd out = apply_stacked(phi, h);
  CHECK(out(0) == 1.0);
  CHECK(out(1) == 0.0);
  h(0) = {0.0, 1.0};
  out = apply_stacked(phi, h);
  CHECK(out(0) == 0.0);
  CHECK(out(1) == 1.0);
}

TEST_CASE("apply_stacked agrees with stack of the complex product", "[phase_matrix]") {
  SeededRng rng(99, "apply");
  for (int rep = 0; rep < 50; ++rep) {
    const PhaseMatrix phi(random_phases(3, 6, rng));
    const Eigen::VectorXcd h = random_cvector(6, rng);
    const Eigen::VectorXd direct = apply_stacked(phi, h);
    const Eigen::VectorXd oracle = stack(phases_to_matrix(phi) * h);
    CHECK((direct - oracle).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("StackedMap batch application matches per-column application", "[phase_matrix]") {
  SeededRng rng(3, "batch");
  const PhaseMatrix phi(random_phases(4, 5, rng));
  const StackedMap map(phi);
  Eigen::MatrixXcd h(5, 3);
  for (Eigen::Index c = 0; c < 3; ++c) h.col(c) = random_cvector(5, rng);
  const Eigen::MatrixXd batch = map.apply_batch(h);
  for (Eigen::Index c = 0; c < 3; ++c)
    CHECK((batch.col(c) - map.apply(h.col(c))).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("phase matrix construction validates input", "[phase_matrix]") {
  CHECK_THROWS_AS(PhaseMatrix(Eigen::MatrixXd(0, 2)), std::invalid_argument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(PhaseMatrix(bad), std::invalid_argument);
  const PhaseMatrix phi(Eigen::MatrixXd::Zero(2, 3));
  CHECK_THROWS_AS(apply_stacked(phi, Eigen::VectorXcd::Zero(4)), std::invalid_argument);
}
