#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include "fkmlab/clifford.hpp"
#include "fkmlab/rng.hpp"

using namespace fkmlab;

TEST_CASE("delta follows the dimension table and its periodicity") {
  CHECK(delta(1) == 1);
  CHECK(delta(2) == 2);
  CHECK(delta(3) == 4);
  CHECK(delta(4) == 4);
  CHECK(delta(5) == 8);
  CHECK(delta(6) == 8);
  CHECK(delta(7) == 8);
  CHECK(delta(8) == 8);
  CHECK(delta(9) == 16);          // 16 * delta(1)
  CHECK(delta(10) == 32);
  CHECK(delta(17) == 256);        // two periods
  CHECK_THROWS_AS(delta(0), Error);
  CHECK_THROWS_AS(delta(-3), Error);
}

TEST_CASE("(1,3) system is the block diagonal / antidiagonal pair on R^6") {
  const auto sys = build_clifford_system(1, 3);
  REQUIRE(sys.l == 3);
  REQUIRE(sys.generators.size() == 2);
  Eigen::MatrixXd p0 = Eigen::MatrixXd::Zero(6, 6);
  p0.topLeftCorner(3, 3).setIdentity();
  p0.bottomRightCorner(3, 3) = -Eigen::MatrixXd::Identity(3, 3);
  Eigen::MatrixXd p1 = Eigen::MatrixXd::Zero(6, 6);
  p1.topRightCorner(3, 3).setIdentity();
  p1.bottomLeftCorner(3, 3).setIdentity();
  CHECK((sys.generators[0] - p0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sys.generators[1] - p1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("construction rejects invalid pairs") {
  CHECK_THROWS_AS(build_clifford_system(1, 2), Error);  // l = 2, m_minus = 0
  try {
    build_clifford_system(1, 2);
  } catch (const Error& e) {
    CHECK(e.code() == "invalid-fkm-pair");
  }
  CHECK_THROWS_AS(build_clifford_system(0, 3), Error);
  CHECK_THROWS_AS(build_clifford_system(2, 0), Error);
}

TEST_CASE("all configurations at desk scale satisfy the Clifford axioms exactly") {
  for (auto [m, k] : {std::pair{1, 3}, {2, 2}, {3, 2}, {4, 2}, {5, 2},
                      {6, 2}, {7, 2}, {8, 2}, {9, 1}, {1, 5}}) {
    const auto sys = build_clifford_system(m, k);
    CAPTURE(m, k, sys.l);
    REQUIRE(static_cast<int>(sys.generators.size()) == m + 1);
    const auto report = verify_clifford(sys, 1e-12);
    CHECK(report.pass);
    CHECK(report.max_residual == 0.0);  // entries are exact signed units
    CHECK(sys.m_minus() > 0);
  }
}

TEST_CASE("verify_clifford flags an injected defect") {
  auto sys = build_clifford_system(1, 3);
  sys.generators[1](0, 3) += 1e-6;
  const auto report = verify_clifford(sys, 1e-12);
  CHECK_FALSE(report.pass);
  CHECK(report.max_residual >= 1e-7);
}

TEST_CASE("construction is deterministic") {
  const auto a = build_clifford_system(3, 2);
  const auto b = build_clifford_system(3, 2);
  for (std::size_t i = 0; i < a.generators.size(); ++i)
    CHECK((a.generators[i] - b.generators[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sphere elements square to the identity and have zero trace") {
  const auto sys = build_clifford_system(1, 3);

  SECTION("basis coefficient returns the generator itself") {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(2);
    a[0] = 1.0;
    const auto e = sphere_element(sys, a);
    CHECK((e.matrix - sys.generators[0]).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("diagonal combination") {
    Eigen::VectorXd a(2);
    a << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const auto e = sphere_element(sys, a);
    const Eigen::MatrixXd sq = e.matrix * e.matrix - Eigen::MatrixXd::Identity(6, 6);
    CHECK(sq.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(e.matrix.trace()) < 1e-13);
  }

  SECTION("zero vector is rejected") {
    CHECK_THROWS_AS(sphere_element(sys, Eigen::VectorXd::Zero(2)), Error);
  }

  SECTION("slightly off unit is renormalized") {
    Eigen::VectorXd a(2);
    a << 1.0 + 5e-9, 0.0;
    const auto e = sphere_element(sys, a);
    CHECK(std::abs(e.coefficients.norm() - 1.0) < 1e-15);
  }
}

TEST_CASE("orthogonal coefficient vectors give anticommuting elements") {
  const auto sys = build_clifford_system(3, 2);
  rng::Stream stream(42, "clifford.bilinear");
  const int dim = sys.ambient_dim();
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a = stream.unit_vector(sys.m + 1);
    Eigen::VectorXd b = stream.gaussian_vector(sys.m + 1);
    b -= a.dot(b) * a;
    b.normalize();
    const auto pa = sphere_element(sys, a);
    const auto pb = sphere_element(sys, b);
    const Eigen::MatrixXd anti = pa.matrix * pb.matrix + pb.matrix * pa.matrix;
    CHECK(anti.cwiseAbs().maxCoeff() < 1e-12);

    // P(a) has eigenvalues +-1, each with multiplicity l
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pa.matrix);
    int plus = 0, minus = 0;
    for (int i = 0; i < dim; ++i) {
      if (es.eigenvalues()[i] > 0.5) ++plus;
      if (es.eigenvalues()[i] < -0.5) ++minus;
      CHECK(std::abs(std::abs(es.eigenvalues()[i]) - 1.0) < 1e-12);
    }
    CHECK(plus == sys.l);
    CHECK(minus == sys.l);
  }
}

TEST_CASE("system serializes to json with row-major matrices") {
  const auto sys = build_clifford_system(1, 3);
  const auto j = to_json(sys);
  CHECK(j["m"] == 1);
  CHECK(j["k"] == 3);
  CHECK(j["l"] == 3);
  REQUIRE(j["matrices"].size() == 2);
  REQUIRE(j["matrices"][0].size() == 36);
  CHECK(j["matrices"][0][0] == 1.0);   // P_0(0,0)
  CHECK(j["matrices"][1][3] == 1.0);   // P_1(0,3) in row-major order
}
