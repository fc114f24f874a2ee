#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "fkmlab/spectra.hpp"

using namespace fkmlab;

namespace {

const FkmGeometry& geom(int m, int k) {
  static std::map<std::pair<int, int>, FkmGeometry> cache;
  auto it = cache.find({m, k});
  if (it == cache.end())
    it = cache.emplace(std::make_pair(m, k), FkmGeometry(build_clifford_system(m, k))).first;
  return it->second;
}

std::vector<Vector> mn_points(const FkmGeometry& g, int count, std::uint64_t seed) {
  std::vector<Vector> out;
  for (int i = 0; i < count; ++i) out.push_back(sample_Mn(g, seed, i));
  return out;
}

std::vector<Vector> mminus_points(const FkmGeometry& g, int count, std::uint64_t seed) {
  std::vector<Vector> out;
  for (int i = 0; i < count; ++i) out.push_back(sample_Mminus(g, seed, i));
  return out;
}

SphereElement element_for(const FkmGeometry& g, std::uint64_t seed) {
  rng::Stream stream(seed, "sigma");
  return sphere_element(g.system, stream.unit_vector(g.system.m + 1));
}

}  // namespace

TEST_CASE("eigenfunction values at landmark points") {
  const auto& g = geom(1, 3);
  const auto p = element_for(g, 1);

  SECTION("omega1 equals one on the positive eigenspace") {
    const auto spec = make_omega1(g, p);
    const Vector x = sample_eigenspace(g, p, +1, 2, 0);
    CHECK(eval(g, spec, x) == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("phi2 at an h_+ image sits at the critical level") {
    const auto spec = make_phi2(g, p);
    const Vector y = focal_map_h(g, p, +1, sample_Mplus(g, 3, 0));
    CHECK(eval(g, spec, y) ==
          Catch::Approx(std::sqrt((1.0 - g.minimal_level) / 2.0)).margin(1e-12));
  }

  SECTION("phi1 vanishes orthogonal to q1") {
    const Vector q1 = draw_generic_q1(g, 4);
    const auto spec = make_phi1(g, q1);
    Vector x = sample_Mn(g, 5, 0);
    x -= x.dot(q1) * q1;
    if (x.norm() > 0.1) {
      x.normalize();
      // x is no longer on M^n; evaluate the ambient extension instead
      CHECK(std::abs(ambient_field(g, spec).value(x)) < 1e-12);
    }
  }

  SECTION("evaluation off the host is rejected") {
    const auto spec = make_phi2(g, p);
    const Vector x = sample_Mminus(g, 6, 0);  // not on M^n
    CHECK_THROWS_AS(eval(g, spec, x), Error);
  }
}

TEST_CASE("generic parameter draws respect the exclusion margins") {
  const auto& g = geom(2, 2);
  for (int i = 0; i < 10; ++i) {
    const Vector q1 = draw_generic_q1(g, 7, i);
    CHECK(generic_margin_q1(g, q1) > kGenericMargin);
    const Vector q2 = draw_generic_q2(g, 7, i);
    CHECK(generic_margin_q2(g, q2) > kGenericMargin);
  }
}

TEST_CASE("all five eigenvalue equations hold pointwise") {
  for (auto [m, k] : {std::pair{1, 3}, {2, 2}}) {
    const auto& g = geom(m, k);
    const auto p = element_for(g, 8);
    const auto on_mn = mn_points(g, 40, 9);
    const auto on_mminus = mminus_points(g, 40, 10);
    const Vector q1 = draw_generic_q1(g, 11);
    const Vector q2 = draw_generic_q2(g, 12);

    CAPTURE(m, k);
    CHECK(verify_eigen_identity(g, make_phi1(g, q1), on_mn, 1e-6).pass);
    CHECK(verify_eigen_identity(g, make_phi2(g, p), on_mn, 1e-6).pass);
    CHECK(verify_eigen_identity(g, make_phi3(g, q1), on_mn, 1e-4).pass);
    CHECK(verify_eigen_identity(g, make_omega1(g, p), on_mminus, 1e-6).pass);
    CHECK(verify_eigen_identity(g, make_omega2(g, q2), on_mminus, 1e-6).pass);
  }
}

TEST_CASE("eigenvalues for (1,3) are 4, 8, 12, 4, 3") {
  const auto& g = geom(1, 3);
  const auto p = element_for(g, 13);
  CHECK(make_phi1(g, draw_generic_q1(g, 14)).eigenvalue == 4.0);
  CHECK(make_phi2(g, p).eigenvalue == 8.0);
  CHECK(make_phi3(g, draw_generic_q1(g, 14)).eigenvalue == 12.0);
  CHECK(make_omega1(g, p).eigenvalue == 4.0);
  CHECK(make_omega2(g, draw_generic_q2(g, 15)).eigenvalue == 3.0);
}

TEST_CASE("a wrong eigenvalue fails the identity check") {
  const auto& g = geom(1, 3);
  auto spec = make_phi1(g, draw_generic_q1(g, 16));
  spec.eigenvalue = g.n + 1.0;  // negative control
  CHECK_FALSE(verify_eigen_identity(g, spec, mn_points(g, 10, 17), 1e-6).pass);
}

TEST_CASE("isoparametric systems for phi2 and omega1") {
  for (auto [m, k] : {std::pair{1, 3}, {2, 2}}) {
    const auto& g = geom(m, k);
    const auto p = element_for(g, 18);
    CAPTURE(m, k);
    CHECK(verify_isoparametric_system(g, make_phi2(g, p), mn_points(g, 50, 19), 1e-8).pass);
    CHECK(verify_isoparametric_system(g, make_omega1(g, p), mminus_points(g, 50, 20), 1e-8).pass);
  }
}

TEST_CASE("phi2 gradient norm for (2,2) follows 4(1 - 3 u^2 / 2)") {
  const auto& g = geom(2, 2);
  const auto p = element_for(g, 21);
  const auto field = ambient_field(g, make_phi2(g, p));
  for (const auto& x : mn_points(g, 30, 22)) {
    const auto frame = tangent_frame(g, x, Variety::Mn);
    const double u = field.value(x);
    const double lhs = tangential_gradient(field, frame).squaredNorm();
    CHECK(std::abs(lhs - 4.0 * (1.0 - 1.5 * u * u)) < 1e-8);
  }
}

TEST_CASE("omega1 gradient vanishes on V_+") {
  const auto& g = geom(1, 3);
  const auto p = element_for(g, 23);
  const auto field = ambient_field(g, make_omega1(g, p));
  const Vector x = sample_eigenspace(g, p, +1, 24, 0);
  const auto frame = tangent_frame(g, x, Variety::Mminus);
  CHECK(tangential_gradient(field, frame).norm() < 1e-9);
}

TEST_CASE("phi2 closed-form gradient matches the projection route") {
  for (auto [m, k] : {std::pair{1, 3}, {2, 2}}) {
    const auto& g = geom(m, k);
    const auto spec = make_phi2(g, element_for(g, 25));
    CAPTURE(m, k);
    CHECK(verify_phi2_gradient_closed_form(g, spec, mn_points(g, 30, 26), 1e-9).pass);
  }
}

TEST_CASE("normal derivatives of phi2") {
  const auto& g = geom(2, 2);
  const auto p = element_for(g, 27);
  std::vector<Vector> regular;
  for (int i = 0; i < 100; ++i) regular.push_back(sample_regular(g, 28, i, 1e-3));
  const auto report = verify_phi2_normal_derivatives(g, p, regular, 1e-8);
  CHECK(report.pass);
}

TEST_CASE("tangency claim on M_-") {
  for (auto [m, k] : {std::pair{1, 3}, {2, 2}, {3, 2}}) {
    const auto& g = geom(m, k);
    const auto p = element_for(g, 29);
    const auto report = verify_tangency_claim(g, p, mminus_points(g, 50, 30), 1e-9);
    CAPTURE(m, k, report.max_residual);
    CHECK(report.pass);
  }
}

TEST_CASE("tangency vector vanishes when x lies in the eigenspace of P") {
  const auto& g = geom(1, 3);
  const auto p = element_for(g, 31);
  const Vector x = sample_eigenspace(g, p, +1, 32, 0);
  const Vector px = p.matrix * x;
  const Vector y = px - x.dot(px) * x;
  CHECK(y.cwiseAbs().maxCoeff() < 1e-12);  // P x = x forces y = 0
}

TEST_CASE("phi2 range bound over many samples, attained on N_+/N_-") {
  const auto& g = geom(1, 3);
  const auto p = element_for(g, 33);
  const auto spec = make_phi2(g, p);
  std::vector<Vector> on_mn;
  for (int i = 0; i < 10000; ++i) on_mn.push_back(sample_Mn(g, 34, i));
  std::vector<Vector> on_npm;
  for (int i = 0; i < 20; ++i) {
    on_npm.push_back(sample_Npm(g, p, +1, 35, i));
    on_npm.push_back(sample_Npm(g, p, -1, 35, i));
  }
  const auto report = verify_phi2_range(g, spec, on_mn, on_npm, 1e-8);
  CHECK(report.pass);
  CHECK(report.details["attainment_residual"].get<double>() < 1e-10);
}

TEST_CASE("counterexample ordering report") {
  const auto& g15 = geom(1, 5);
  const auto rep = counterexample_ordering(g15);
  CHECK(rep.omega_order_flipped);  // 4m = 4 < l+m-1 = 5
  REQUIRE(rep.rows.size() == 5);
  CHECK(rep.rows[0].eigenvalue == 8.0);   // n = 2l-2 = 8
  CHECK(rep.rows[1].eigenvalue == 16.0);  // 2n
  CHECK(rep.rows[2].eigenvalue == 24.0);  // 3n
  CHECK(rep.rows[3].eigenvalue == 4.0);   // 4m
  CHECK(rep.rows[4].eigenvalue == 5.0);   // l+m-1

  CHECK_FALSE(counterexample_ordering(geom(1, 3)).omega_order_flipped);  // 4 > 3
  CHECK_FALSE(counterexample_ordering(geom(2, 2)).omega_order_flipped);  // 8 > 5
  CHECK_FALSE(counterexample_ordering(geom(3, 2)).omega_order_flipped);  // 12 > 10
}

TEST_CASE("range bounds of the eigenfunctions") {
  const auto& g = geom(1, 3);
  const auto p = element_for(g, 36);
  const Vector q1 = draw_generic_q1(g, 37);
  const auto phi1 = make_phi1(g, q1);
  const auto phi3 = make_phi3(g, q1);
  const auto omega1 = make_omega1(g, p);
  for (int i = 0; i < 50; ++i) {
    const Vector x = sample_Mn(g, 38, i);
    CHECK(std::abs(eval(g, phi1, x)) <= 1.0 + 1e-12);
    CHECK(std::abs(eval(g, phi3, x)) <= 1.0 + 1e-12);
    const Vector xm = sample_Mminus(g, 39, i);
    CHECK(std::abs(eval(g, omega1, xm)) <= 1.0 + 1e-12);
  }
}
