#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "cmsense/rng.hpp"
#include "cmsense/sampling.hpp"

using namespace cmsense;

TEST_CASE("random_unitary of size one has unit modulus", "[sampling]") {
  const Eigen::MatrixXcd u = random_unitary(1, SeededRng(4, "u1"));
  CHECK(std::abs(std::abs(u(0, 0)) - 1.0) <= 1e-12);
}

TEST_CASE("random_unitary passes the Gram residual check", "[sampling]") {
  for (const auto seed : {1ULL, 2ULL, 3ULL}) {
    const Eigen::MatrixXcd u = random_unitary(8, SeededRng(seed, "unitary"));
    const Eigen::MatrixXcd gram = u.adjoint() * u - Eigen::MatrixXcd::Identity(8, 8);
    CHECK(gram.cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("random_unitary is deterministic under a fixed seed", "[sampling]") {
  const Eigen::MatrixXcd a = random_unitary(6, SeededRng(42, "det"));
  const Eigen::MatrixXcd b = random_unitary(6, SeededRng(42, "det"));
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXcd c = random_unitary(6, SeededRng(43, "det"));
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("sample_sphere returns unit vectors", "[sampling]") {
  const Eigen::MatrixXcd u = sample_sphere(4, 200, SeededRng(7, "sphere"));
  REQUIRE(u.rows() == 4);
  REQUIRE(u.cols() == 200);
  for (Eigen::Index j = 0; j < u.cols(); ++j) CHECK(std::abs(u.col(j).norm() - 1.0) <= 1e-14);
  const Eigen::MatrixXcd one = sample_sphere(1, 5, SeededRng(8, "s1"));
  for (Eigen::Index j = 0; j < one.cols(); ++j)
    CHECK(std::abs(std::abs(one(0, j)) - 1.0) <= 1e-14);
}

TEST_CASE("sample_sphere is isotropic", "[sampling]") {
  const Eigen::MatrixXcd u = sample_sphere(4, 100000, SeededRng(21, "iso"));
  const Eigen::VectorXcd mean = u.rowwise().mean();
  for (Eigen::Index i = 0; i < mean.size(); ++i) CHECK(std::abs(mean(i)) <= 0.02);
}

TEST_CASE("steinhaus entries have modulus 1/sqrt(m)", "[sampling]") {
  const Eigen::MatrixXcd a = sample_steinhaus_matrix(8, 16, SeededRng(5, "st"));
  const double expected = 1.0 / std::sqrt(8.0);
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      CHECK(std::abs(std::abs(a(r, c)) - expected) <= 1e-15);
}

TEST_CASE("steinhaus phases average out", "[sampling]") {
  const Eigen::MatrixXcd a = sample_steinhaus_matrix(1, 10000, SeededRng(13, "avg"));
  CHECK(std::abs(a.mean()) <= 0.05);
}

TEST_CASE("steinhaus draws are deterministic and seed-sensitive", "[sampling]") {
  const Eigen::MatrixXcd a = sample_steinhaus_matrix(3, 4, SeededRng(1, "s"));
  const Eigen::MatrixXcd b = sample_steinhaus_matrix(3, 4, SeededRng(1, "s"));
  const Eigen::MatrixXcd c = sample_steinhaus_matrix(3, 4, SeededRng(2, "s"));
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("sampling argument validation", "[sampling]") {
  CHECK_THROWS_AS(random_unitary(0, SeededRng(1)), std::invalid_argument);
  CHECK_THROWS_AS(sample_sphere(0, 1, SeededRng(1)), std::invalid_argument);
  CHECK_THROWS_AS(sample_steinhaus_matrix(0, 1, SeededRng(1)), std::invalid_argument);
}
