#include <catch2/catch_amalgamated.hpp>

#include "fkmlab/fkm.hpp"
#include "fkmlab/rng.hpp"

using namespace fkmlab;

namespace {

FkmGeometry geom13() { return FkmGeometry(build_clifford_system(1, 3)); }

Vector basis_vec(int dim, int i) {
  Vector v = Vector::Zero(dim);
  v[i] = 1.0;
  return v;
}

// central-difference oracles, step 1e-5
Vector grad_fd(const FkmGeometry& g, const Vector& x, double h = 1e-5) {
  Vector out(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vector e = basis_vec(static_cast<int>(x.size()), i);
    out[i] = (g.quartic(x + h * e) - g.quartic(x - h * e)) / (2.0 * h);
  }
  return out;
}

Matrix hess_fd(const FkmGeometry& g, const Vector& x, double h = 1e-5) {
  Matrix out(x.size(), x.size());
  for (int j = 0; j < x.size(); ++j) {
    Vector e = basis_vec(static_cast<int>(x.size()), j);
    out.col(j) = (g.quartic_grad(x + h * e) - g.quartic_grad(x - h * e)) / (2.0 * h);
  }
  return out;
}

}  // namespace

TEST_CASE("derived constants") {
  const auto g = geom13();
  CHECK(g.n == 4);
  CHECK(g.m_plus == 1);
  CHECK(g.m_minus == 1);
  CHECK(g.minimal_level == 0.0);

  const FkmGeometry g22(build_clifford_system(2, 2));
  CHECK(g22.n == 6);
  CHECK(g22.minimal_level == Catch::Approx(-1.0 / 3.0));
  CHECK(g22.minimal_level ==
        Catch::Approx(double(g22.m_minus - g22.m_plus) / double(g22.m_minus + g22.m_plus)));

  const FkmGeometry g32(build_clifford_system(3, 2));
  CHECK(g32.minimal_level == Catch::Approx(1.0 / 7.0));  // l = 8: (8-6-1)/7
  CHECK(std::abs(g32.minimal_level) < 1.0);
}

TEST_CASE("quartic values at landmark points") {
  const auto g = geom13();
  CHECK(g.quartic(basis_vec(6, 0)) == Catch::Approx(-1.0));  // e_1 lies on M_-

  Vector x(6);
  x << 1, 0, 0, 0, 1, 0;
  x /= std::sqrt(2.0);
  CHECK(g.quartic(x) == Catch::Approx(1.0));  // (e_1+e_5)/sqrt2 lies on M_+

  CHECK(g.quartic(Vector::Zero(6)) == 0.0);
}

TEST_CASE("quartic stays within [-1,1] on the sphere") {
  const auto g = geom13();
  rng::Stream stream(7, "fkm.range");
  for (int i = 0; i < 500; ++i) {
    const double f = g.quartic(stream.unit_vector(6));
    CHECK(f <= 1.0 + 1e-12);
    CHECK(f >= -1.0 - 1e-12);
  }
}

TEST_CASE("gradient and hessian match finite differences") {
  for (auto [m, k] : {std::pair{1, 3}, {2, 2}, {3, 2}}) {
    const FkmGeometry g(build_clifford_system(m, k));
    rng::Stream stream(11, "fkm.fd");
    for (int i = 0; i < 5; ++i) {
      const Vector x = stream.unit_vector(g.ambient_dim());
      CAPTURE(m, k, i);
      CHECK((g.quartic_grad(x) - grad_fd(g, x)).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((g.quartic_hess(x) - hess_fd(g, x)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("degree-4 Euler identity") {
  const auto g = geom13();
  rng::Stream stream(3, "fkm.euler");
  for (int i = 0; i < 100; ++i) {
    const Vector x = stream.unit_vector(6);
    CHECK(std::abs(g.quartic_grad(x).dot(x) - 4.0 * g.quartic(x)) < 1e-12);
  }
}

TEST_CASE("spherical gradient identity |grad F - 4Fx|^2 = 16(1 - F^2)") {
  for (auto [m, k] : {std::pair{1, 3}, {2, 2}, {3, 2}}) {
    const FkmGeometry g(build_clifford_system(m, k));
    rng::Stream stream(5, "fkm.spherical");
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Vector x = stream.unit_vector(g.ambient_dim());
      const double f = g.quartic(x);
      const double lhs = (g.quartic_grad(x) - 4.0 * f * x).squaredNorm();
      worst = std::max(worst, std::abs(lhs - 16.0 * (1.0 - f * f)));
    }
    CAPTURE(m, k);
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("quartic is invariant under x -> -x and x -> P_a x") {
  const FkmGeometry g(build_clifford_system(2, 2));
  rng::Stream stream(9, "fkm.sym");
  for (int i = 0; i < 50; ++i) {
    const Vector x = stream.unit_vector(8);
    const double f = g.quartic(x);
    CHECK(std::abs(g.quartic(Vector(-x)) - f) < 1e-10);
    for (const auto& p : g.system.generators)
      CHECK(std::abs(g.quartic(Vector(p * x)) - f) < 1e-10);
  }
}

TEST_CASE("unit normal is unit length and orthogonal to the position") {
  const auto g = geom13();
  rng::Stream stream(13, "fkm.normal");
  int used = 0;
  for (int i = 0; used < 100 && i < 1000; ++i) {
    const Vector x = stream.unit_vector(6);
    if (!g.is_regular(x, 1e-6)) continue;
    ++used;
    const Vector xi = g.unit_normal(x);
    CHECK(std::abs(xi.norm() - 1.0) < 1e-10);
    CHECK(std::abs(xi.dot(x)) < 1e-10);
  }
  CHECK(used == 100);
}

TEST_CASE("unit normal reports focal degeneracy on M_+") {
  const auto g = geom13();
  Vector x(6);
  x << 1, 0, 0, 0, 1, 0;
  x /= std::sqrt(2.0);
  CHECK_THROWS_AS(g.unit_normal(x), Error);
  try {
    g.unit_normal(x);
  } catch (const Error& e) {
    CHECK(e.code() == "focal-degeneracy");
  }
}

TEST_CASE("membership residuals at landmark points") {
  const auto g = geom13();
  const Vector e1 = basis_vec(6, 0);
  CHECK(membership(g, e1, Variety::Mminus, 1e-12).pass);

  Vector mp(6);
  mp << 1, 0, 0, 0, 1, 0;
  mp /= std::sqrt(2.0);
  CHECK(membership(g, mp, Variety::Mplus, 1e-12).pass);
  CHECK_FALSE(membership(g, mp, Variety::Mn, 1e-6).pass);  // F = 1 != c0

  // c0 = 0 for (1,3): points of M^4 are exactly the F = 0 unit vectors
  CHECK(g.minimal_level == 0.0);
  CHECK_FALSE(membership(g, e1, Variety::Mn, 1e-6).pass);
}

TEST_CASE("tagged memberships for V and N require the sphere element") {
  const auto g = geom13();
  const auto p = sphere_element(g.system, basis_vec(2, 0));
  const Vector e1 = basis_vec(6, 0);  // P_0 e1 = e1, so e1 lies in V_+
  CHECK(membership(g, e1, {Variety::Vplus, p}, 1e-12).pass);
  CHECK_FALSE(membership(g, e1, {Variety::Vminus, p}, 1e-6).pass);
  CHECK_THROWS_AS(membership_residual(g, e1, Variety::Vplus), Error);
}
