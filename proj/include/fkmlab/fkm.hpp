#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "fkmlab/clifford.hpp"
#include "fkmlab/error.hpp"

namespace fkmlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Geometry of the FKM family attached to one Clifford system:
// the quartic q(x) = |x|^4 - 2 sum_a <P_a x, x>^2, its restriction to the
// unit sphere, and the derived constants of the isoparametric foliation.
struct FkmGeometry {
  CliffordSystem system;
  int n = 0;                   // dimension of the isoparametric hypersurface, 2l - 2
  int m_plus = 0;              // = m
  int m_minus = 0;             // = l - m - 1
  double minimal_level = 0.0;  // c0 = (l - 2m - 1)/(l - 1); M^n = f^{-1}(c0)
  static constexpr int distinct_curvatures = 4;  // g

  explicit FkmGeometry(CliffordSystem sys) : system(std::move(sys)) {
    n = 2 * system.l - 2;
    m_plus = system.m_plus();
    m_minus = system.m_minus();
    minimal_level = static_cast<double>(system.l - 2 * system.m - 1) /
                    static_cast<double>(system.l - 1);
  }

  int ambient_dim() const { return system.ambient_dim(); }
  ConfigId config() const { return {system.m, system.k, system.l}; }

  // half-width of the phi2 range on M^n; also the level of its focal sets
  double phi2_critical_value() const { return std::sqrt((1.0 - minimal_level) / 2.0); }

  // opening angle of the foliation: c0 = cos(4 theta1), 0 < theta1 < pi/4
  double focal_angle() const { return std::acos(minimal_level) / 4.0; }

  // s_a(x) = <P_a x, x>
  Vector quadratic_forms(const Vector& x) const {
    Vector s(system.m + 1);
    for (int a = 0; a <= system.m; ++a) s[a] = x.dot(system.generators[a] * x);
    return s;
  }

  double quartic(const Vector& x) const {
    const double r2 = x.squaredNorm();
    return r2 * r2 - 2.0 * quadratic_forms(x).squaredNorm();
  }

  Vector quartic_grad(const Vector& x) const {
    const Vector s = quadratic_forms(x);
    Vector g = 4.0 * x.squaredNorm() * x;
    for (int a = 0; a <= system.m; ++a) g -= 8.0 * s[a] * (system.generators[a] * x);
    return g;
  }

  Matrix quartic_hess(const Vector& x) const {
    const int dim = ambient_dim();
    const Vector s = quadratic_forms(x);
    Matrix h = 8.0 * x * x.transpose();
    h += 4.0 * x.squaredNorm() * Matrix::Identity(dim, dim);
    for (int a = 0; a <= system.m; ++a) {
      const Vector pax = system.generators[a] * x;
      h -= 16.0 * pax * pax.transpose();
      h -= 8.0 * s[a] * system.generators[a];
    }
    return h;
  }

  // f = F restricted to the unit sphere
  double sphere_level(const Vector& x) const { return quartic(x); }

  bool is_regular(const Vector& x, double margin = 1e-10) const {
    const double f = quartic(x);
    return 1.0 - f * f > margin;
  }

  // xi = (grad F - 4 F x) / (4 sqrt(1 - F^2)); unit normal of the level set
  // of f within the sphere, pointing toward increasing f.
  Vector unit_normal(const Vector& x) const {
    const double f = quartic(x);
    const double denom_sq = 1.0 - f * f;
    if (denom_sq <= 1e-10)
      fail("focal-degeneracy", "unit normal undefined at |f| = 1 (f = " +
                                   std::to_string(f) + ")");
    return (quartic_grad(x) - 4.0 * f * x) / (4.0 * std::sqrt(denom_sq));
  }
};

enum class Variety { Sphere, Mn, Mplus, Mminus, Nplus, Nminus, Vplus, Vminus };

inline std::string variety_name(Variety v) {
  switch (v) {
    case Variety::Sphere: return "sphere";
    case Variety::Mn: return "Mn";
    case Variety::Mplus: return "Mplus";
    case Variety::Mminus: return "Mminus";
    case Variety::Nplus: return "Nplus";
    case Variety::Nminus: return "Nminus";
    case Variety::Vplus: return "Vplus";
    case Variety::Vminus: return "Vminus";
  }
  return "?";
}

// N_+/N_-/V_+/V_- are cut out by a chosen element of the Clifford sphere;
// the element rides along in the tag.
struct VarietyTag {
  Variety kind = Variety::Sphere;
  std::optional<SphereElement> element;

  VarietyTag(Variety v) : kind(v) {}  // NOLINT: implicit by design
  VarietyTag(Variety v, SphereElement p) : kind(v), element(std::move(p)) {}
};

inline int variety_dim(const FkmGeometry& geom, Variety v) {
  switch (v) {
    case Variety::Sphere: return geom.n + 1;
    case Variety::Mn: return geom.n;
    case Variety::Mplus: return geom.n - geom.m_plus;
    case Variety::Mminus: return geom.system.l + geom.system.m - 1;
    case Variety::Nplus:
    case Variety::Nminus: return geom.n - geom.m_plus;
    case Variety::Vplus:
    case Variety::Vminus: return geom.system.l - 1;
  }
  return -1;
}

// Max constraint residual of x against the tagged variety.
inline double membership_residual(const FkmGeometry& geom, const Vector& x,
                                  const VarietyTag& tag) {
  double r = std::abs(x.norm() - 1.0);
  const auto need_element = [&]() -> const SphereElement& {
    require(tag.element.has_value(), "invalid-argument",
            variety_name(tag.kind) + " membership needs a Clifford sphere element");
    return *tag.element;
  };
  switch (tag.kind) {
    case Variety::Sphere:
      break;
    case Variety::Mn:
      r = std::max(r, std::abs(geom.sphere_level(x) - geom.minimal_level));
      break;
    case Variety::Mplus:
      r = std::max(r, geom.quadratic_forms(x).cwiseAbs().maxCoeff());
      break;
    case Variety::Mminus:
      r = std::max(r, std::abs(1.0 - geom.quadratic_forms(x).squaredNorm()));
      break;
    case Variety::Nplus:
    case Variety::Nminus: {
      const auto& p = need_element();
      const double target = (tag.kind == Variety::Nplus ? 1.0 : -1.0) *
                            geom.phi2_critical_value();
      r = std::max(r, std::abs(geom.sphere_level(x) - geom.minimal_level));
      r = std::max(r, std::abs(x.dot(p.matrix * x) - target));
      break;
    }
    case Variety::Vplus:
    case Variety::Vminus: {
      const auto& p = need_element();
      const double target = tag.kind == Variety::Vplus ? 1.0 : -1.0;
      r = std::max(r, std::abs(x.dot(p.matrix * x) - target));
      break;
    }
  }
  return r;
}

struct MembershipReport {
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

inline MembershipReport membership(const FkmGeometry& geom, const Vector& x,
                                   const VarietyTag& tag, double tol) {
  MembershipReport rep;
  rep.residual = membership_residual(geom, x, tag);
  rep.tol = tol;
  rep.pass = rep.residual < tol;
  return rep;
}

}  // namespace fkmlab
