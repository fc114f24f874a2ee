#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "fkmlab/calculus.hpp"
#include "fkmlab/error.hpp"
#include "fkmlab/report.hpp"
#include "fkmlab/spectra.hpp"
#include "fkmlab/varieties.hpp"

namespace fkmlab {

// ---------------------------------------------------------------------------
// Critical points of the height-type eigenfunctions.
//
// phi1 and phi3 on M^n are critical exactly where q1 lies in span{x, xi(x)},
// i.e. where the normal geodesic through q1 meets M^n: 8 points.  omega2 on
// M_- is critical where the same geodesic touches M_- (f = -1): 4 points.
// Points are located geometrically along the geodesic, never by descent.
// ---------------------------------------------------------------------------

constexpr int kScanNodes = 4096;
constexpr double kDedupRadius = 1e-8;
constexpr double kDegenerateDiagonal = 1e-6;

namespace detail {

inline void dedup_points(std::vector<Vector>& pts) {
  std::vector<Vector> unique;
  for (const auto& p : pts) {
    bool seen = false;
    for (const auto& u : unique)
      if ((p - u).norm() < kDedupRadius) {
        seen = true;
        break;
      }
    if (!seen) unique.push_back(p);
  }
  pts.swap(unique);
}

}  // namespace detail

// All intersections of the normal geodesic through q1 with M^n.
// Exactly 2g = 8 points for any q1 off the focal varieties; the caller is
// responsible for comparing the count (wrong counts are reported as check
// failures, never repaired here).
inline std::vector<Vector> critical_points_normal_geodesic(const FkmGeometry& geom,
                                                           const Vector& q1) {
  const double f = geom.sphere_level(q1);
  if (1.0 - f * f <= 1e-10)
    fail("degenerate-q1", "normal direction undefined at q1 (|f| = 1)");
  const Vector xi = geom.unit_normal(q1);
  const auto gamma = [&](double t) -> Vector {
    return std::cos(t) * q1 + std::sin(t) * xi;
  };
  const auto g = [&](double t) { return geom.sphere_level(gamma(t)) - geom.minimal_level; };

  // |g| below this is indistinguishable from zero at the evaluation noise
  // floor; such nodes are roots in their own right (q1 exactly on a leaf).
  constexpr double kNodeZero = 1e-13;
  std::vector<double> roots;
  double prev_t = 0.0, prev_g = g(0.0);
  if (std::abs(prev_g) < kNodeZero) roots.push_back(0.0);
  for (int i = 1; i <= kScanNodes; ++i) {
    const double t = 2.0 * M_PI * static_cast<double>(i) / kScanNodes;
    const double gt = g(t);
    if (std::abs(gt) < kNodeZero) {
      roots.push_back(t);
    } else if (std::abs(prev_g) >= kNodeZero && (prev_g < 0.0) != (gt < 0.0)) {
      double lo = prev_t, hi = t, glo = prev_g;
      while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) {
          lo = hi = mid;
        } else if ((glo < 0.0) == (gm < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_t = t;
    prev_g = gt;
  }

  std::vector<Vector> points;
  points.reserve(roots.size());
  for (double t : roots) points.push_back(gamma(t).normalized());
  detail::dedup_points(points);
  return points;
}

// Tangency points of the normal geodesic through q2 with M_-: the minima of
// 1 + f along the geodesic with value below 1e-10.
inline std::vector<Vector> critical_points_omega2(const FkmGeometry& geom,
                                                  const Vector& q2) {
  const double f = geom.sphere_level(q2);
  if (1.0 - f * f <= 1e-10)
    fail("degenerate-q2", "normal direction undefined at q2 (|f| = 1)");
  const Vector xi = geom.unit_normal(q2);
  const auto gamma = [&](double t) -> Vector {
    return std::cos(t) * q2 + std::sin(t) * xi;
  };
  const auto g = [&](double t) { return 1.0 + geom.sphere_level(gamma(t)); };
  const auto dg = [&](double t) {
    const Vector y = gamma(t);
    const Vector dy = -std::sin(t) * q2 + std::cos(t) * xi;
    return geom.quartic_grad(y).dot(dy);
  };

  std::vector<double> minima;
  std::vector<double> values(kScanNodes);
  for (int i = 0; i < kScanNodes; ++i)
    values[i] = g(2.0 * M_PI * static_cast<double>(i) / kScanNodes);
  for (int i = 0; i < kScanNodes; ++i) {
    const double prev = values[(i + kScanNodes - 1) % kScanNodes];
    const double next = values[(i + 1) % kScanNodes];
    if (values[i] <= prev && values[i] <= next) {
      // refine the derivative root bracketed by the neighbours
      double lo = 2.0 * M_PI * (i - 1) / kScanNodes;
      double hi = 2.0 * M_PI * (i + 1) / kScanNodes;
      double dlo = dg(lo);
      for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double dm = dg(mid);
        if (dm == 0.0) {
          lo = hi = mid;
        } else if ((dlo < 0.0) == (dm < 0.0)) {
          lo = mid;
          dlo = dm;
        } else {
          hi = mid;
        }
      }
      minima.push_back(0.5 * (lo + hi));
    }
  }

  std::vector<Vector> points;
  for (double t : minima) {
    if (g(t) < 1e-10) points.push_back(retract_Mminus(geom, gamma(t)));
  }
  detail::dedup_points(points);
  return points;
}

// ---------------------------------------------------------------------------
// Classification.  Hessian diagonals in the principal frame:
//   phi1: +- <mu_i xi - x, q1>,   phi3: -+ mu_i <mu_i xi - x, q1>
// with a per-function global sign calibrated against finite differences of
// the function along retracted curves (the printed closed forms leave the
// frame orientation implicit).
// ---------------------------------------------------------------------------

struct CriticalPoint {
  Vector x;
  Eigenfunction function;
  double geodesic_parameter = 0.0;  // t with q = cos t x + sin t xi(x)
  double span_residual = 0.0;       // |cos t x + sin t xi - q|
  double gradient_norm = 0.0;
  Vector hessian_diagonal;          // sign-calibrated; the intrinsic Hessian spectrum
  Vector hessian_fd;                // finite-difference diagonal, same frame
  double fd_relative_error = 0.0;
  int closed_form_sign = 0;         // sign applied to the printed closed form
  int morse_index = 0;
  bool degenerate = false;
};

namespace detail {

inline double fd_second_difference(const FkmGeometry& geom, const ScalarField& field,
                                   const Vector& x, const Vector& dir, double step) {
  const bool on_mn = field.host == Variety::Mn;
  const auto retract = [&](const Vector& y) {
    return on_mn ? retract_Mn(geom, y) : retract_Mminus(geom, y);
  };
  const Vector yp = retract(std::cos(step) * x + std::sin(step) * dir);
  const Vector ym = retract(std::cos(step) * x - std::sin(step) * dir);
  return (field.value(yp) - 2.0 * field.value(x) + field.value(ym)) / (step * step);
}

}  // namespace detail

inline CriticalPoint classify(const FkmGeometry& geom, const Vector& x,
                              Eigenfunction function, const Vector& q1,
                              double fd_step = 1e-4) {
  require(function == Eigenfunction::Phi1 || function == Eigenfunction::Phi3,
          "invalid-argument", "classify handles phi1 and phi3");
  CriticalPoint cp;
  cp.x = x;
  cp.function = function;

  const auto frame = tangent_frame(geom, x, Variety::Mn);
  const Vector& xi = *frame.normal;

  // principal frame
  const Matrix s = shape_operator_matrix(geom, frame);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  const int n = frame.dim();
  Matrix principal(geom.ambient_dim(), n);
  Vector mu(n);
  for (int i = 0; i < n; ++i) {  // descending eigenvalue order
    mu[i] = es.eigenvalues()[n - 1 - i];
    principal.col(i) = frame.basis * es.eigenvectors().col(n - 1 - i);
  }

  cp.geodesic_parameter = std::atan2(q1.dot(xi), q1.dot(x));
  cp.span_residual =
      (std::cos(cp.geodesic_parameter) * x + std::sin(cp.geodesic_parameter) * xi - q1)
          .norm();

  EigenfunctionSpec spec = function == Eigenfunction::Phi1
                               ? EigenfunctionSpec{Eigenfunction::Phi1, Variety::Mn,
                                                   static_cast<double>(geom.n), q1, {}}
                               : EigenfunctionSpec{Eigenfunction::Phi3, Variety::Mn,
                                                   3.0 * geom.n, q1, {}};
  const auto field = ambient_field(geom, spec);
  cp.gradient_norm = tangential_gradient(field, frame).norm();

  // closed forms as printed, and finite differences in the same frame
  Vector closed(n), fd(n);
  for (int i = 0; i < n; ++i) {
    const double base = (mu[i] * xi - x).dot(q1);
    closed[i] = function == Eigenfunction::Phi1 ? -base : -mu[i] * base;
    fd[i] = detail::fd_second_difference(geom, field, x, principal.col(i), fd_step);
  }
  const double orientation = closed.dot(fd);
  cp.closed_form_sign = orientation >= 0.0 ? +1 : -1;
  cp.hessian_diagonal = cp.closed_form_sign * closed;
  cp.hessian_fd = fd;

  double rel = 0.0;
  for (int i = 0; i < n; ++i) {
    const double denom = std::max(std::abs(fd[i]), std::abs(cp.hessian_diagonal[i]));
    if (denom > 1e-12)
      rel = std::max(rel, std::abs(cp.hessian_diagonal[i] - fd[i]) / denom);
  }
  cp.fd_relative_error = rel;

  cp.morse_index = 0;
  double min_abs = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (cp.hessian_diagonal[i] < 0.0) ++cp.morse_index;
    min_abs = std::min(min_abs, std::abs(cp.hessian_diagonal[i]));
  }
  cp.degenerate = min_abs < kDegenerateDiagonal;
  return cp;
}

// omega2 has no printed closed form; the full intrinsic Hessian is assembled
// from finite differences and diagonalized.
inline CriticalPoint classify_omega2(const FkmGeometry& geom, const Vector& x,
                                     const Vector& q2, double fd_step = 1e-4) {
  CriticalPoint cp;
  cp.x = x;
  cp.function = Eigenfunction::Omega2;

  const auto frame = tangent_frame(geom, x, Variety::Mminus);
  EigenfunctionSpec spec{Eigenfunction::Omega2, Variety::Mminus,
                         static_cast<double>(geom.system.l + geom.system.m - 1), q2, {}};
  const auto field = ambient_field(geom, spec);
  cp.gradient_norm = tangential_gradient(field, frame).norm();

  const int d = frame.dim();
  Matrix hess(d, d);
  for (int i = 0; i < d; ++i)
    hess(i, i) = detail::fd_second_difference(geom, field, x, frame.basis.col(i), fd_step);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const Vector up = (frame.basis.col(i) + frame.basis.col(j)) / std::sqrt(2.0);
      const Vector um = (frame.basis.col(i) - frame.basis.col(j)) / std::sqrt(2.0);
      const double hij = 0.5 * (detail::fd_second_difference(geom, field, x, up, fd_step) -
                                detail::fd_second_difference(geom, field, x, um, fd_step));
      hess(i, j) = hij;
      hess(j, i) = hij;
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
  cp.hessian_diagonal = es.eigenvalues();
  cp.hessian_fd = es.eigenvalues();
  cp.closed_form_sign = 0;  // no closed form to calibrate

  cp.morse_index = 0;
  double min_abs = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    if (cp.hessian_diagonal[i] < 0.0) ++cp.morse_index;
    min_abs = std::min(min_abs, std::abs(cp.hessian_diagonal[i]));
  }
  cp.degenerate = min_abs < kDegenerateDiagonal;
  return cp;
}

// ---------------------------------------------------------------------------
// Critical set of phi2 and the focal maps.
// ---------------------------------------------------------------------------

// (a) |grad phi2| = 0 <=> phi2 = +-sqrt((1-c0)/2) via the gradient-norm law;
// (b) rank of dh_+ restricted to T M_+ equals n - m;
// (c) j o h = id on M_+ (both signs).
inline VerificationReport verify_critical_set_phi2(const FkmGeometry& geom,
                                                   const SphereElement& p,
                                                   std::uint64_t seed, int samples,
                                                   double tol) {
  EigenfunctionSpec spec = make_phi2(geom, p);
  const auto field = ambient_field(geom, spec);
  const double bound = geom.phi2_critical_value();
  ResidualStats stats;
  double worst_gradient_at_npm = 0.0, worst_roundtrip = 0.0;
  int min_rank = geom.ambient_dim();

  for (int i = 0; i < samples; ++i) {
    // law |grad|^2 = 4(1 - 2 u^2/(1-c0)) at generic points: gradient vanishes
    // only at the critical levels and nowhere else
    const Vector x = sample_Mn(geom, seed, i);
    const auto frame = tangent_frame(geom, x, Variety::Mn);
    const double u = field.value(x);
    const double grad_sq = tangential_gradient(field, frame).squaredNorm();
    stats.add(std::abs(grad_sq - 4.0 * (1.0 - 2.0 * u * u / (1.0 - geom.minimal_level))));
  }

  const int focal_samples = std::max(8, samples / 8);
  for (int sign : {+1, -1}) {
    for (int i = 0; i < focal_samples; ++i) {
      const Vector base = sample_Mplus(geom, seed + 1, i);
      const Vector y = focal_map_h(geom, p, sign, base);
      // gradient vanishes on N_+/N_-
      const auto fy = tangent_frame(geom, y, Variety::Mn);
      const double grad_norm = tangential_gradient(field, fy).norm();
      worst_gradient_at_npm = std::max(worst_gradient_at_npm, grad_norm);
      stats.add(grad_norm);
      stats.add(std::abs(std::abs(field.value(y)) - bound));
      // round trip
      const double rt = (focal_map_j(geom, y) - base).norm();
      worst_roundtrip = std::max(worst_roundtrip, rt);
      stats.add(rt);
      // rank of dh on T M_+
      const auto bframe = tangent_frame(geom, base, Variety::Mplus);
      const Matrix dh = focal_cos_t(geom) * bframe.basis +
                        static_cast<double>(sign) * focal_sin_t(geom) *
                            (p.matrix * bframe.basis);
      Eigen::JacobiSVD<Matrix> svd(dh);
      const double cutoff = 1e-8 * svd.singularValues()[0];
      int rank = 0;
      for (int j = 0; j < svd.singularValues().size(); ++j)
        if (svd.singularValues()[j] > cutoff) ++rank;
      min_rank = std::min(min_rank, rank);
    }
  }

  auto report = VerificationReport::from_stats("critical_set_phi2", geom.config(), seed,
                                               stats, tol);
  report.details["gradient_at_Npm_max"] = worst_gradient_at_npm;
  report.details["roundtrip_max"] = worst_roundtrip;
  report.details["dh_rank"] = min_rank;
  report.details["dh_rank_expected"] = geom.n - geom.system.m;
  report.pass = report.pass && min_rank == geom.n - geom.system.m;
  return report;
}

// Gradient ascent of omega1 within M_- toward V_{sign}; converges linearly
// and stops once 1 - sign*omega1 < tol.  Used for the inclusion check that
// does not presuppose the eigenspace description.
inline Vector approach_Vpm(const FkmGeometry& geom, const SphereElement& p, int sign,
                           Vector x, double tol = 1e-12) {
  const Matrix& pm = p.matrix;
  for (int it = 0; it < 512; ++it) {
    const double val = static_cast<double>(sign) * x.dot(pm * x);
    if (1.0 - val < tol) return x;
    const auto frame = tangent_frame(geom, x, Variety::Mminus);
    Vector grad = 2.0 * static_cast<double>(sign) * (pm * x);
    grad = frame.basis * (frame.basis.transpose() * grad);
    const double norm = grad.norm();
    if (norm < 1e-14) break;
    const double ds = std::clamp((1.0 - val) / norm, 1e-9, 0.2);
    x = retract_Mminus(geom, std::cos(ds) * x + std::sin(ds) * (grad / norm));
  }
  const double val = static_cast<double>(sign) * x.dot(pm * x);
  require(1.0 - val < tol, "newton-divergence", "omega1 ascent did not reach V");
  return x;
}

// Both inclusions of Lemma-level content:
//  (a) unit vectors of E_sign(P) lie on M_- with omega1 = sign;
//  (b) M_- points driven to omega1 = sign land in the eigenspace;
// plus the frame dimension l - 1.
inline VerificationReport verify_Vpm_spheres(const FkmGeometry& geom,
                                             const SphereElement& p, std::uint64_t seed,
                                             int samples, double tol) {
  ResidualStats stats;
  int frame_dim = -1;
  for (int sign : {+1, -1}) {
    const Variety variety = sign > 0 ? Variety::Vplus : Variety::Vminus;
    for (int i = 0; i < samples; ++i) {
      // direction (a): eigenspace -> M_- with omega1 = sign
      const Vector x = sample_eigenspace(geom, p, sign, seed, i);
      stats.add(membership_residual(geom, x, Variety::Mminus));
      stats.add(std::abs(x.dot(p.matrix * x) - static_cast<double>(sign)));
      stats.add((p.matrix * x - static_cast<double>(sign) * x).cwiseAbs().maxCoeff());

      // direction (b): omega1 = sign on M_- -> eigenspace, measured through
      // the level value reached by the intrinsic ascent
      if (i < std::max(2, samples / 8)) {
        const Vector start = sample_Mminus(geom, seed + 2, i * 2 + (sign > 0 ? 0 : 1));
        const Vector reached = approach_Vpm(geom, p, sign, start, tol * 1e-1);
        stats.add(std::abs(reached.dot(p.matrix * reached) - static_cast<double>(sign)));
        stats.add(membership_residual(geom, reached, Variety::Mminus));
      }
    }
    const Vector probe = sample_eigenspace(geom, p, sign, seed + 3, 0);
    frame_dim = tangent_frame(geom, probe, {variety, p}).dim();
  }
  auto report = VerificationReport::from_stats("vpm_spheres", geom.config(), seed,
                                               stats, tol);
  report.details["frame_dim"] = frame_dim;
  report.details["frame_dim_expected"] = geom.system.l - 1;
  report.pass = report.pass && frame_dim == geom.system.l - 1;
  return report;
}

}  // namespace fkmlab
