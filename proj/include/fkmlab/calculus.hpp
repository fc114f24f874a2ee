#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "fkmlab/error.hpp"
#include "fkmlab/fkm.hpp"
#include "fkmlab/varieties.hpp"

namespace fkmlab {

// ---------------------------------------------------------------------------
// Pointwise intrinsic differential operators on the varieties, built from
// exact ambient derivatives.  The hosts (M^n and M_-) are minimal in the
// sphere, so the intrinsic Laplacian is the trace of great-circle second
// derivatives over an orthonormal tangent frame:
//   Lap g(x) = sum_i d^2/dt^2|_0 G(cos t x + sin t e_i)
//            = sum_i Hess G(e_i,e_i) - dim * <grad G(x), x>.
// ---------------------------------------------------------------------------

struct ScalarField {
  std::string id;
  Variety host = Variety::Mn;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;   // ambient gradient
  std::function<Matrix(const Vector&)> hessian;    // ambient Hessian; may be empty

  bool has_hessian() const { return static_cast<bool>(hessian); }
};

// Projection of the ambient gradient onto the tangent space of the frame.
// On M^n this is grad G - x(G) x - xi(G) xi, matching the hypersurface split.
inline Vector tangential_gradient(const ScalarField& field, const TangentFrame& frame) {
  const Vector g = field.gradient(frame.point);
  if (frame.tag.kind == Variety::Mn) {
    Vector out = g - g.dot(frame.point) * frame.point;
    out -= out.dot(*frame.normal) * *frame.normal;
    return out;
  }
  return frame.basis * (frame.basis.transpose() * g);
}

// Exact route.  Valid whenever the host is minimal in the sphere.
inline double intrinsic_laplacian(const ScalarField& field, const TangentFrame& frame) {
  require(field.has_hessian(), "invalid-argument",
          "exact Laplacian route needs an ambient Hessian evaluator");
  const Matrix h = field.hessian(frame.point);
  const double radial = field.gradient(frame.point).dot(frame.point);
  double acc = 0.0;
  for (int i = 0; i < frame.dim(); ++i)
    acc += frame.basis.col(i).dot(h * frame.basis.col(i));
  return acc - static_cast<double>(frame.dim()) * radial;
}

// Finite-difference route: second differences of the field along the same
// great circles.  Independent of the exact Hessian; also the primary route
// for fields without one (phi3).
inline double intrinsic_laplacian_fd(const ScalarField& field, const TangentFrame& frame,
                                     double step = 1e-4) {
  const Vector& x = frame.point;
  const double center = field.value(x);
  const double ch = std::cos(step), sh = std::sin(step);
  double acc = 0.0;
  for (int i = 0; i < frame.dim(); ++i) {
    const Vector e = frame.basis.col(i);
    acc += (field.value(ch * x + sh * e) - 2.0 * center + field.value(ch * x - sh * e)) /
           (step * step);
  }
  return acc;
}

inline double laplacian_auto(const ScalarField& field, const TangentFrame& frame) {
  return field.has_hessian() ? intrinsic_laplacian(field, frame)
                             : intrinsic_laplacian_fd(field, frame);
}

// Literal two-line cascade for a hypersurface host:
//   LapAmbient G = LapSphere G + n x(G) + xx(G)      (xx = iterated field)
//   LapSphere G|_{M^n} = Lap g + xi xi (G)            (H = 0, geodesic xi)
// solved for Lap g.  Cross-check of the trace route on M^n.
inline double laplacian_cascade_Mn(const ScalarField& field, const TangentFrame& frame) {
  require(frame.tag.kind == Variety::Mn && frame.normal.has_value(), "invalid-argument",
          "cascade route is specific to the hypersurface host");
  require(field.has_hessian(), "invalid-argument", "cascade route needs a Hessian");
  const Vector& x = frame.point;
  const Vector& xi = *frame.normal;
  const Matrix h = field.hessian(x);
  const double xg = field.gradient(x).dot(x);
  const int n = frame.dim();

  const double ambient = h.trace();
  const double xx = x.dot(h * x) + xg;  // x applied twice as a vector field
  const double sphere = ambient - static_cast<double>(n) * xg - xx;
  const double xixi = xi.dot(h * xi) - xg;  // normal-geodesic extension
  return sphere - xixi;
}

// Spherical check of the first cascade line on an arbitrary sphere point:
// returns |LapAmbient G - (LapSphere G + n x(G) + xx(G))| with the sphere
// Laplacian computed over a full tangent frame of the sphere.
inline double two_laplacian_residual(const FkmGeometry& geom, const ScalarField& field,
                                     const Vector& x) {
  const auto frame = tangent_frame(geom, x, Variety::Sphere);
  const Matrix h = field.hessian(x);
  const double xg = field.gradient(x).dot(x);
  double sphere = 0.0;
  for (int i = 0; i < frame.dim(); ++i)
    sphere += frame.basis.col(i).dot(h * frame.basis.col(i));
  sphere -= static_cast<double>(frame.dim()) * xg;
  const double xx = x.dot(h * x) + xg;
  const int n = geom.n;  // sphere dimension is n + 1
  return std::abs(h.trace() - (sphere + static_cast<double>(n) * xg + xx));
}

// ---------------------------------------------------------------------------
// Shape operator of M^n and principal curvatures.
// A_xi v = -(D_v xi)^tangential with the ambient derivative of
// xi = (grad F - 4 F x)/(4 sqrt(1 - F^2)); along tangent directions the
// normalization factor has zero derivative, leaving
// D_v xi = (Hess F v - 4 F v)/(4 sqrt(1 - F^2)).
// ---------------------------------------------------------------------------

inline Vector shape_operator_apply(const FkmGeometry& geom, const TangentFrame& frame,
                                   const Vector& v) {
  require(frame.tag.kind == Variety::Mn && frame.normal.has_value(), "invalid-argument",
          "shape operator lives on the hypersurface");
  const Vector& x = frame.point;
  const Vector& xi = *frame.normal;
  const double f = geom.sphere_level(x);
  const double denom = 4.0 * std::sqrt(1.0 - f * f);
  Vector d = (geom.quartic_hess(x) * v - 4.0 * f * v) / denom;
  d = -d;
  d -= d.dot(x) * x;
  d -= d.dot(xi) * xi;
  return d;
}

inline Matrix shape_operator_matrix(const FkmGeometry& geom, const TangentFrame& frame) {
  const int n = frame.dim();
  Matrix s(n, n);
  for (int i = 0; i < n; ++i) {
    const Vector av = shape_operator_apply(geom, frame, frame.basis.col(i));
    for (int j = 0; j < n; ++j) s(j, i) = frame.basis.col(j).dot(av);
  }
  return s;
}

struct CurvatureSpectrum {
  std::vector<std::pair<double, int>> values;  // (value, multiplicity), descending
  Vector raw;                                  // full spectrum, ascending
  double asymmetry = 0.0;                      // shape matrix asymmetry residual
  bool clusters_resolved = true;
};

inline CurvatureSpectrum principal_curvatures(const FkmGeometry& geom,
                                              const TangentFrame& frame,
                                              double cluster_gap = 1e-6) {
  Matrix s = shape_operator_matrix(geom, frame);
  CurvatureSpectrum out;
  out.asymmetry = (s - s.transpose()).cwiseAbs().maxCoeff();
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  out.raw = es.eigenvalues();
  // cluster descending
  int i = frame.dim() - 1;
  while (i >= 0) {
    const double v = out.raw[i];
    int count = 1;
    while (i - count >= 0 && std::abs(out.raw[i - count] - v) < cluster_gap) ++count;
    double mean = 0.0;
    for (int j = 0; j < count; ++j) mean += out.raw[i - j];
    out.values.emplace_back(mean / count, count);
    i -= count;
  }
  // gaps between clusters must stay clearly above the clustering radius
  for (std::size_t c = 1; c < out.values.size(); ++c)
    if (std::abs(out.values[c - 1].first - out.values[c].first) < cluster_gap)
      out.clusters_resolved = false;
  return out;
}

// Expected spectrum cot(theta1 + (j-1) pi/4) with multiplicities alternating
// (m_+, m_-, m_+, m_-) in theta order.
inline std::vector<std::pair<double, int>> expected_principal_curvatures(
    const FkmGeometry& geom) {
  std::vector<std::pair<double, int>> out;
  const double theta1 = geom.focal_angle();
  for (int j = 0; j < 4; ++j) {
    const double theta = theta1 + j * M_PI / 4.0;
    out.emplace_back(std::cos(theta) / std::sin(theta),
                     j % 2 == 0 ? geom.m_plus : geom.m_minus);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mean curvature of the level hypersurface of an isoparametric field inside
// its host: minus the divergence of the unit intrinsic gradient, by central
// differences of exact pointwise gradients along retracted curves.  Sign
// convention: h(t) > 0 for small t > 0 in configurations with m > 1 (fixed
// against the (2,2) closed form and recorded in reports).
// ---------------------------------------------------------------------------

constexpr int kMeanCurvatureSign = -1;  // h = sign * div(grad/|grad|)

inline double level_mean_curvature(const FkmGeometry& geom, const ScalarField& field,
                                   const TangentFrame& frame, double step = 1e-5) {
  const Vector g0 = tangential_gradient(field, frame);
  require(g0.norm() > 1e-8, "focal-degeneracy",
          "level mean curvature undefined where the field gradient vanishes");
  const bool on_mn = field.host == Variety::Mn;

  const auto unit_grad = [&](const Vector& y) -> Vector {
    const auto fy = tangent_frame(geom, y, frame.tag);
    const Vector gy = tangential_gradient(field, fy);
    return gy / gy.norm();
  };

  const Vector& x = frame.point;
  double div = 0.0;
  for (int i = 0; i < frame.dim(); ++i) {
    const Vector e = frame.basis.col(i);
    const Vector yp = on_mn ? retract_Mn(geom, std::cos(step) * x + std::sin(step) * e)
                            : retract_Mminus(geom, std::cos(step) * x + std::sin(step) * e);
    const Vector ym = on_mn ? retract_Mn(geom, std::cos(step) * x - std::sin(step) * e)
                            : retract_Mminus(geom, std::cos(step) * x - std::sin(step) * e);
    div += e.dot(unit_grad(yp) - unit_grad(ym)) / (2.0 * step);
  }
  return kMeanCurvatureSign * div;
}

// Moves a host point along the unit intrinsic gradient flow of the field to
// the requested level.  Newton steps with retraction; the path is irrelevant,
// only the landing point (on the host, at the level) is used.
inline Vector move_to_field_level(const FkmGeometry& geom, const ScalarField& field,
                                  Vector x, double target, double tol = 1e-12) {
  const bool on_mn = field.host == Variety::Mn;
  for (int it = 0; it < 256; ++it) {
    const auto frame = tangent_frame(geom, x, on_mn ? Variety::Mn : Variety::Mminus);
    const double value = field.value(x);
    if (std::abs(value - target) < tol) return x;
    const Vector grad = tangential_gradient(field, frame);
    const double norm = grad.norm();
    require(norm > 1e-10, "focal-degeneracy",
            "gradient flow stalled at a critical level");
    double ds = std::clamp((target - value) / norm, -0.15, 0.15);
    const Vector dir = grad / norm;
    const Vector moved = std::cos(ds) * x + std::sin(ds) * dir;
    x = on_mn ? retract_Mn(geom, moved) : retract_Mminus(geom, moved);
  }
  fail("newton-divergence", "level flow did not converge");
}

// Closed forms from b(t) = |grad|^2 and a(t) = Lap as functions of the level:
// h(t) = (b'(t) - 2a(t)) / (2 sqrt(b(t))).
inline double mean_curvature_closed_form_phi2(const FkmGeometry& geom, double t) {
  const double c0 = geom.minimal_level;
  return (geom.n - 4.0 / (1.0 - c0)) * t / std::sqrt(1.0 - 2.0 * t * t / (1.0 - c0));
}

inline double mean_curvature_closed_form_omega1(const FkmGeometry& geom, double t) {
  return 2.0 * (geom.system.m - 1) * t / std::sqrt(1.0 - t * t);
}

}  // namespace fkmlab
