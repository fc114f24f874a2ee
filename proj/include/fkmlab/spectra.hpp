#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fkmlab/calculus.hpp"
#include "fkmlab/error.hpp"
#include "fkmlab/fkm.hpp"
#include "fkmlab/report.hpp"
#include "fkmlab/varieties.hpp"

namespace fkmlab {

// ---------------------------------------------------------------------------
// The five eigenfunctions and their claimed eigenvalues:
//   on M^n:  phi1 = <x, q1>       -> n
//            phi2 = <P x, x>      -> 2n
//            phi3 = <xi(x), q1>   -> 3n
//   on M_-:  omega1 = <P x, x>    -> 4m
//            omega2 = <x, q2>     -> l + m - 1  (= dim M_-)
// ---------------------------------------------------------------------------

enum class Eigenfunction { Phi1, Phi2, Phi3, Omega1, Omega2 };

inline std::string eigenfunction_name(Eigenfunction id) {
  switch (id) {
    case Eigenfunction::Phi1: return "phi1";
    case Eigenfunction::Phi2: return "phi2";
    case Eigenfunction::Phi3: return "phi3";
    case Eigenfunction::Omega1: return "omega1";
    case Eigenfunction::Omega2: return "omega2";
  }
  return "?";
}

struct EigenfunctionSpec {
  Eigenfunction id = Eigenfunction::Phi1;
  Variety host = Variety::Mn;
  double eigenvalue = 0.0;
  Vector q;                          // phi1, phi3, omega2
  std::optional<SphereElement> element;  // phi2, omega1

  std::string name() const { return eigenfunction_name(id); }
};

// Margin (in membership residual) that generic parameters must keep from the
// excluded varieties; rejection sampling below enforces it.
constexpr double kGenericMargin = 1e-3;

inline double generic_margin_q1(const FkmGeometry& geom, const Vector& q) {
  double margin = membership_residual(geom, q, Variety::Mn);
  margin = std::min(margin, membership_residual(geom, q, Variety::Mplus));
  margin = std::min(margin, membership_residual(geom, q, Variety::Mminus));
  return margin;
}

inline double generic_margin_q2(const FkmGeometry& geom, const Vector& q) {
  return std::min(membership_residual(geom, q, Variety::Mplus),
                  membership_residual(geom, q, Variety::Mminus));
}

inline Vector draw_generic_q1(const FkmGeometry& geom, std::uint64_t seed,
                              std::uint64_t index = 0) {
  for (std::uint64_t bump = 0; bump < 256; ++bump) {
    rng::Stream stream(seed, "q1", index * 256 + bump);
    const Vector q = stream.unit_vector(geom.ambient_dim());
    if (generic_margin_q1(geom, q) > kGenericMargin) return q;
  }
  fail("degenerate-q1", "rejection sampling for q1 exhausted");
}

inline Vector draw_generic_q2(const FkmGeometry& geom, std::uint64_t seed,
                              std::uint64_t index = 0) {
  for (std::uint64_t bump = 0; bump < 256; ++bump) {
    rng::Stream stream(seed, "q2", index * 256 + bump);
    const Vector q = stream.unit_vector(geom.ambient_dim());
    if (generic_margin_q2(geom, q) > kGenericMargin) return q;
  }
  fail("degenerate-q2", "rejection sampling for q2 exhausted");
}

inline EigenfunctionSpec make_phi1(const FkmGeometry& geom, Vector q1) {
  require(generic_margin_q1(geom, q1) > kGenericMargin, "degenerate-q1",
          "q1 must keep clear of M_+, M_- and M^n");
  return {Eigenfunction::Phi1, Variety::Mn, static_cast<double>(geom.n), std::move(q1), {}};
}

inline EigenfunctionSpec make_phi2(const FkmGeometry& geom, SphereElement p) {
  return {Eigenfunction::Phi2, Variety::Mn, 2.0 * geom.n, {}, std::move(p)};
}

inline EigenfunctionSpec make_phi3(const FkmGeometry& geom, Vector q1) {
  require(generic_margin_q1(geom, q1) > kGenericMargin, "degenerate-q1",
          "q1 must keep clear of M_+, M_- and M^n");
  return {Eigenfunction::Phi3, Variety::Mn, 3.0 * geom.n, std::move(q1), {}};
}

inline EigenfunctionSpec make_omega1(const FkmGeometry& geom, SphereElement p) {
  return {Eigenfunction::Omega1, Variety::Mminus, 4.0 * geom.system.m, {}, std::move(p)};
}

inline EigenfunctionSpec make_omega2(const FkmGeometry& geom, Vector q2) {
  require(generic_margin_q2(geom, q2) > kGenericMargin, "degenerate-q2",
          "q2 must keep clear of M_+ and M_-");
  return {Eigenfunction::Omega2, Variety::Mminus,
          static_cast<double>(geom.system.l + geom.system.m - 1), std::move(q2), {}};
}

// Ambient extension as a ScalarField.  phi3 carries exact first derivatives
// of xi but no Hessian; its Laplacian goes through the finite-difference
// great-circle route.
inline ScalarField ambient_field(const FkmGeometry& geom, const EigenfunctionSpec& spec) {
  const std::string id = spec.name();
  const int dim = geom.ambient_dim();
  switch (spec.id) {
    case Eigenfunction::Phi1:
    case Eigenfunction::Omega2: {
      const Vector q = spec.q;
      return {id, spec.host,
              [q](const Vector& x) { return x.dot(q); },
              [q](const Vector&) { return q; },
              [dim](const Vector&) { return Matrix(Matrix::Zero(dim, dim)); }};
    }
    case Eigenfunction::Phi2:
    case Eigenfunction::Omega1: {
      require(spec.element.has_value(), "invalid-argument", id + " needs P in Sigma");
      const Matrix p = spec.element->matrix;
      return {id, spec.host,
              [p](const Vector& x) { return x.dot(p * x); },
              [p](const Vector& x) { return Vector(2.0 * (p * x)); },
              [p](const Vector&) { return Matrix(2.0 * p); }};
    }
    case Eigenfunction::Phi3: {
      const Vector q = spec.q;
      const FkmGeometry* g = &geom;
      return {id, spec.host,
              [g, q](const Vector& x) { return g->unit_normal(x).dot(q); },
              [g, q](const Vector& x) {
                // grad <xi, q> with xi = u * r, u = grad F - 4 F x,
                // r = 1/(4 sqrt(1 - F^2)):
                //   (D xi)^T q = r (Du)^T q + (u . q) grad r
                const double f = g->quartic(x);
                const double one_minus = 1.0 - f * f;
                require(one_minus > 1e-10, "focal-degeneracy",
                        "phi3 gradient undefined near a focal variety");
                const Vector gradF = g->quartic_grad(x);
                const Vector u = gradF - 4.0 * f * x;
                const double r = 1.0 / (4.0 * std::sqrt(one_minus));
                const Vector dut_q =
                    g->quartic_hess(x) * q - 4.0 * (x.dot(q)) * gradF - 4.0 * f * q;
                const Vector grad_r =
                    (f / (4.0 * std::pow(one_minus, 1.5))) * gradF;
                return Vector(r * dut_q + u.dot(q) * grad_r);
              },
              nullptr};
    }
  }
  fail("invalid-argument", "unknown eigenfunction");
}

inline double eval(const FkmGeometry& geom, const EigenfunctionSpec& spec, const Vector& x) {
  const double res = membership_residual(geom, x, spec.host);
  require(res < 1e-8, "wrong-variety",
          spec.name() + " evaluated off its host (" + variety_name(spec.host) +
              "), residual " + std::to_string(res));
  return ambient_field(geom, spec).value(x);
}

// ---------------------------------------------------------------------------
// Verification of the spectral and isoparametric identities.
// ---------------------------------------------------------------------------

inline TangentFrame host_frame(const FkmGeometry& geom, const EigenfunctionSpec& spec,
                               const Vector& x) {
  return tangent_frame(geom, x, spec.host);
}

// max over samples of |Lap u + lambda u| / (1 + |u|)
inline VerificationReport verify_eigen_identity(const FkmGeometry& geom,
                                                const EigenfunctionSpec& spec,
                                                const std::vector<Vector>& points,
                                                double tol, std::uint64_t seed = 0) {
  require(!points.empty(), "invalid-argument", "need at least one sample");
  const auto field = ambient_field(geom, spec);
  ResidualStats stats;
  for (const auto& x : points) {
    const auto frame = host_frame(geom, spec, x);
    const double u = field.value(x);
    const double lap = laplacian_auto(field, frame);
    stats.add(std::abs(lap + spec.eigenvalue * u) / (1.0 + std::abs(u)));
  }
  auto report = VerificationReport::from_stats("eigen_" + spec.name(), geom.config(),
                                               seed, stats, tol);
  report.details["eigenvalue"] = spec.eigenvalue;
  report.details["laplacian_route"] = field.has_hessian() ? "exact" : "fd-great-circle";
  return report;
}

// Both lines of the isoparametric system:
//   phi2:   |grad|^2 = 4 (1 - 2 u^2 / (1 - c0)),  Lap u = -2n u
//   omega1: |grad|^2 = 4 (1 - u^2),               Lap u = -4m u
inline VerificationReport verify_isoparametric_system(const FkmGeometry& geom,
                                                      const EigenfunctionSpec& spec,
                                                      const std::vector<Vector>& points,
                                                      double tol, std::uint64_t seed = 0) {
  require(spec.id == Eigenfunction::Phi2 || spec.id == Eigenfunction::Omega1,
          "invalid-argument", "isoparametric system applies to phi2 and omega1");
  const auto field = ambient_field(geom, spec);
  ResidualStats stats;
  double worst_gradient = 0.0, worst_laplacian = 0.0;
  for (const auto& x : points) {
    const auto frame = host_frame(geom, spec, x);
    const double u = field.value(x);
    const double grad_sq = tangential_gradient(field, frame).squaredNorm();
    const double b = spec.id == Eigenfunction::Phi2
                         ? 4.0 * (1.0 - 2.0 * u * u / (1.0 - geom.minimal_level))
                         : 4.0 * (1.0 - u * u);
    const double r1 = std::abs(grad_sq - b);
    const double r2 = std::abs(intrinsic_laplacian(field, frame) + spec.eigenvalue * u);
    worst_gradient = std::max(worst_gradient, r1);
    worst_laplacian = std::max(worst_laplacian, r2);
    stats.add(std::max(r1, r2));
  }
  auto report = VerificationReport::from_stats("isoparametric_" + spec.name(),
                                               geom.config(), seed, stats, tol);
  report.details["gradient_line_max"] = worst_gradient;
  report.details["laplacian_line_max"] = worst_laplacian;
  return report;
}

// phi2 gradient, closed form vs projection route:
//   grad phi2 = 2 (P x - u x + u sqrt((1+c0)/(1-c0)) xi)
inline VerificationReport verify_phi2_gradient_closed_form(
    const FkmGeometry& geom, const EigenfunctionSpec& spec,
    const std::vector<Vector>& points, double tol, std::uint64_t seed = 0) {
  require(spec.id == Eigenfunction::Phi2, "invalid-argument", "phi2 only");
  const auto field = ambient_field(geom, spec);
  const double ratio =
      std::sqrt((1.0 + geom.minimal_level) / (1.0 - geom.minimal_level));
  ResidualStats stats;
  for (const auto& x : points) {
    const auto frame = host_frame(geom, spec, x);
    const double u = field.value(x);
    const Vector projected = tangential_gradient(field, frame);
    const Vector closed =
        2.0 * (spec.element->matrix * x - u * x + u * ratio * *frame.normal);
    stats.add((projected - closed).cwiseAbs().maxCoeff());
  }
  return VerificationReport::from_stats("gradient_phi2_closed_form", geom.config(),
                                        seed, stats, tol);
}

// First- and second-order normal derivatives of phi2:
//   xi(phi2) = -2 sqrt((1+f)/(1-f)) phi2   at any regular point,
//   xi(xi(phi2)) = -4 phi2                 along the normal geodesic.
inline VerificationReport verify_phi2_normal_derivatives(
    const FkmGeometry& geom, const SphereElement& p,
    const std::vector<Vector>& regular_points, double tol, std::uint64_t seed = 0) {
  ResidualStats stats;
  double worst_first = 0.0, worst_second = 0.0;
  for (const auto& x : regular_points) {
    const double f = geom.sphere_level(x);
    const double u = x.dot(p.matrix * x);
    const Vector xi = geom.unit_normal(x);
    const double first = xi.dot(2.0 * (p.matrix * x));
    const double expected = -2.0 * std::sqrt((1.0 + f) / (1.0 - f)) * u;
    const double r1 = std::abs(first - expected);

    // second derivative of the quadratic along t -> cos t x + sin t xi
    const double second =
        -2.0 * u + 2.0 * xi.dot(p.matrix * xi);
    const double r2 = std::abs(second + 4.0 * u);
    worst_first = std::max(worst_first, r1);
    worst_second = std::max(worst_second, r2);
    stats.add(std::max(r1, r2));
  }
  auto report = VerificationReport::from_stats("xi_phi2_identities", geom.config(),
                                               seed, stats, tol);
  report.details["first_order_max"] = worst_first;
  report.details["second_order_max"] = worst_second;
  return report;
}

// Tangency of y = P x - <P x, x> x along M_-:
//   (a) y lies in E_-(P(x)):  P(x) y = -y
//   (b) y is orthogonal to the computed normal space of M_-.
inline VerificationReport verify_tangency_claim(const FkmGeometry& geom,
                                                const SphereElement& p,
                                                const std::vector<Vector>& points_on_mminus,
                                                double tol, std::uint64_t seed = 0) {
  ResidualStats stats;
  double worst_eigen = 0.0, worst_normal = 0.0;
  for (const auto& x : points_on_mminus) {
    const Vector px = p.matrix * x;
    const Vector y = px - x.dot(px) * x;
    const auto script_p = sphere_element(geom.system, geom.quadratic_forms(x));
    const double r1 = (script_p.matrix * y + y).cwiseAbs().maxCoeff();
    const Matrix normals = normal_frame_Mminus(geom, x);
    const double r2 = (normals.transpose() * y).cwiseAbs().maxCoeff();
    worst_eigen = std::max(worst_eigen, r1);
    worst_normal = std::max(worst_normal, r2);
    stats.add(std::max(r1, r2));
  }
  auto report = VerificationReport::from_stats("tangency_claim", geom.config(), seed,
                                               stats, tol);
  report.details["eigenspace_max"] = worst_eigen;
  report.details["normal_orthogonality_max"] = worst_normal;
  return report;
}

// Range of phi2 on M^n: |phi2| <= sqrt((1-c0)/2), attained on N_+/N_-.
inline VerificationReport verify_phi2_range(const FkmGeometry& geom,
                                            const EigenfunctionSpec& spec,
                                            const std::vector<Vector>& mn_points,
                                            const std::vector<Vector>& npm_points,
                                            double tol, std::uint64_t seed = 0) {
  require(spec.id == Eigenfunction::Phi2, "invalid-argument", "phi2 only");
  const auto field = ambient_field(geom, spec);
  const double bound = geom.phi2_critical_value();
  ResidualStats stats;
  double attained = 0.0;
  for (const auto& x : mn_points) {
    const double over = std::max(0.0, std::abs(field.value(x)) - bound);
    stats.add(over);
  }
  for (const auto& x : npm_points) {
    attained = std::max(attained, std::abs(std::abs(field.value(x)) - bound));
    stats.add(std::abs(std::abs(field.value(x)) - bound));
  }
  auto report = VerificationReport::from_stats("phi2_range_bound", geom.config(), seed,
                                               stats, tol);
  report.details["bound"] = bound;
  report.details["attainment_residual"] = attained;
  return report;
}

// (lambda, critical set) catalogue per host, with the eigenvalue-order flag
// 4m < l+m-1 that powers the focal-submanifold counterexample.
struct OrderingRow {
  std::string host;
  std::string function;
  double eigenvalue;
  std::string critical_set;
  std::int64_t expected_count = -1;  // -1: a submanifold, not a finite set
};

struct OrderingReport {
  ConfigId config;
  std::vector<OrderingRow> rows;
  bool omega_order_flipped = false;  // true iff 4m < l+m-1
  int morse_number_hypersurface = 8;  // 2g
  int morse_number_focal = 4;         // g
};

inline OrderingReport counterexample_ordering(const FkmGeometry& geom) {
  OrderingReport rep;
  rep.config = geom.config();
  const double n = geom.n;
  const double m = geom.system.m;
  const double dim_mminus = geom.system.l + geom.system.m - 1;
  rep.rows = {
      {"Mn", "phi1", n, "8 points", 8},
      {"Mn", "phi2", 2 * n, "submanifold N_+ u N_-", -1},
      {"Mn", "phi3", 3 * n, "8 points", 8},
      {"Mminus", "omega1", 4 * m, "submanifold V_+ u V_-", -1},
      {"Mminus", "omega2", dim_mminus, "4 points", 4},
  };
  rep.omega_order_flipped = 4 * geom.system.m < geom.system.l + geom.system.m - 1;
  return rep;
}

inline nlohmann::ordered_json to_json(const OrderingReport& rep) {
  nlohmann::ordered_json j;
  j["config"] = {{"m", rep.config.m}, {"k", rep.config.k}, {"l", rep.config.l}};
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"host", r.host},
                    {"function", r.function},
                    {"eigenvalue", r.eigenvalue},
                    {"critical_set", r.critical_set},
                    {"expected_count", r.expected_count}});
  }
  j["rows"] = std::move(rows);
  j["omega_order_flipped"] = rep.omega_order_flipped;
  j["morse_number_hypersurface"] = rep.morse_number_hypersurface;
  j["morse_number_focal"] = rep.morse_number_focal;
  return j;
}

}  // namespace fkmlab
