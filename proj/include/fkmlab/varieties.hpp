#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fkmlab/error.hpp"
#include "fkmlab/fkm.hpp"
#include "fkmlab/rng.hpp"

namespace fkmlab {

// ---------------------------------------------------------------------------
// Seeded samplers for all varieties and orthonormal tangent frames.
// Every sampler is a pure function of (geometry, seed, index); sweeps derive
// per-sample indices so reports reproduce bit-for-bit.
// ---------------------------------------------------------------------------

inline Vector sample_sphere(const FkmGeometry& geom, std::uint64_t seed,
                            std::uint64_t index = 0) {
  rng::Stream stream(seed, "sphere", index);
  return stream.unit_vector(geom.ambient_dim());
}

// Regular start for level projections: redraw until away from the focal sets.
inline Vector sample_regular(const FkmGeometry& geom, std::uint64_t seed,
                             std::uint64_t index = 0, double margin = 1e-6) {
  for (std::uint64_t bump = 0; bump < 256; ++bump) {
    rng::Stream stream(seed, "sphere.regular", index * 1024 + bump);
    Vector x = stream.unit_vector(geom.ambient_dim());
    if (geom.is_regular(x, margin)) return x;
  }
  fail("degenerate-start", "could not draw a regular sphere point");
}

// Moves along the normal geodesic t -> cos t x0 + sin t xi(x0) to the level
// f = c, choosing the root of smallest |t|.  Bracketing scan plus bisection,
// then Newton polish; no closed form of f along the geodesic is assumed.
inline Vector project_to_level(const FkmGeometry& geom, const Vector& x0, double c) {
  require(c > -1.0 && c < 1.0, "invalid-argument",
          "target level must lie in (-1,1); focal sets have dedicated samplers");
  const double f0 = geom.sphere_level(x0);
  if (1.0 - f0 * f0 <= 1e-8)
    fail("degenerate-start", "projection start is too close to a focal variety");
  const Vector xi0 = geom.unit_normal(x0);

  const auto gamma = [&](double t) -> Vector {
    return std::cos(t) * x0 + std::sin(t) * xi0;
  };
  const auto g = [&](double t) { return geom.sphere_level(gamma(t)) - c; };
  const auto dg = [&](double t) {
    const Vector y = gamma(t);
    const Vector dy = -std::sin(t) * x0 + std::cos(t) * xi0;
    return geom.quartic_grad(y).dot(dy);
  };

  constexpr int kNodes = 2048;
  double best_t = std::numeric_limits<double>::infinity();
  bool found = false;
  const auto consider = [&](double root) {
    for (int it = 0; it < 3; ++it) {
      const double d = dg(root);
      if (std::abs(d) < 1e-12) break;
      root -= g(root) / d;
    }
    if (std::abs(root) < std::abs(best_t)) best_t = root;
    found = true;
  };
  constexpr double kNodeZero = 1e-13;  // evaluation noise floor counts as a root
  double prev_t = -M_PI / 2.0;
  double prev_g = g(prev_t);
  if (std::abs(prev_g) < kNodeZero) consider(prev_t);
  for (int i = 1; i <= kNodes; ++i) {
    const double t = -M_PI / 2.0 + M_PI * static_cast<double>(i) / kNodes;
    const double gt = g(t);
    if (std::abs(gt) < kNodeZero) {
      consider(t);
    } else if (std::abs(prev_g) >= kNodeZero && (prev_g < 0.0) != (gt < 0.0)) {
      double lo = prev_t, hi = t;
      double glo = prev_g;
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
      consider(0.5 * (lo + hi));
    }
    prev_t = t;
    prev_g = gt;
  }
  require(found, "no-root", "no level crossing found along the normal geodesic");
  return gamma(best_t).normalized();
}

inline Vector sample_Mn(const FkmGeometry& geom, std::uint64_t seed,
                        std::uint64_t index = 0) {
  return project_to_level(geom, sample_regular(geom, seed, index), geom.minimal_level);
}

// x in M_-: pick unit a, form P = sum a_b P_b, take a unit vector of the +1
// eigenspace of P.  Then <P_b x, x> = a_b for every b.
inline Vector sample_Mminus(const FkmGeometry& geom, std::uint64_t seed,
                            std::uint64_t index = 0) {
  rng::Stream stream(seed, "mminus", index);
  const Vector a = stream.unit_vector(geom.system.m + 1);
  const auto p = sphere_element(geom.system, a);
  const Vector v = stream.gaussian_vector(geom.ambient_dim());
  Vector x = 0.5 * (v + p.matrix * v);
  const double norm = x.norm();
  require(norm > 1e-8, "degenerate-start", "eigenspace projection collapsed");
  return x / norm;
}

// Unit vector of E_{sign}(P); lands on V_{sign}(P) inside M_-.
inline Vector sample_eigenspace(const FkmGeometry& geom, const SphereElement& p,
                                int sign, std::uint64_t seed, std::uint64_t index = 0) {
  rng::Stream stream(seed, "eigenspace", index);
  const Vector v = stream.gaussian_vector(geom.ambient_dim());
  Vector x = 0.5 * (v + static_cast<double>(sign) * (p.matrix * v));
  const double norm = x.norm();
  require(norm > 1e-8, "degenerate-start", "eigenspace projection collapsed");
  return x / norm;
}

// Projected Gauss-Newton for the m+1 quadratic constraints <P_a x, x> = 0 on
// the sphere.  Armijo backtracking, at most 64 iterations per start; the
// caller may restart with fresh seeds.
inline std::optional<Vector> project_to_Mplus_from(const FkmGeometry& geom, Vector x,
                                                   double tol = 1e-13) {
  const int mm = geom.system.m;
  x.normalize();
  for (int iter = 0; iter < 64; ++iter) {
    const Vector s = geom.quadratic_forms(x);
    if (s.cwiseAbs().maxCoeff() < tol) return x;
    Eigen::MatrixXd jt(geom.ambient_dim(), mm + 1);  // constraint gradients, tangent part
    for (int a = 0; a <= mm; ++a)
      jt.col(a) = 2.0 * (geom.system.generators[a] * x - s[a] * x);
    const Eigen::MatrixXd gram = jt.transpose() * jt;
    const Vector lambda = gram.ldlt().solve(s);
    const Vector step = -jt * lambda;
    double scale = 1.0;
    const double base = s.squaredNorm();
    bool moved = false;
    while (scale > 1e-6) {
      const Vector trial = (x + scale * step).normalized();
      if (geom.quadratic_forms(trial).squaredNorm() < (1.0 - 1e-4 * scale) * base) {
        x = trial;
        moved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!moved) return std::nullopt;
  }
  const Vector s = geom.quadratic_forms(x);
  if (s.cwiseAbs().maxCoeff() < tol) return x;
  return std::nullopt;
}

inline Vector sample_Mplus(const FkmGeometry& geom, std::uint64_t seed,
                           std::uint64_t index = 0) {
  for (std::uint64_t restart = 0; restart < 32; ++restart) {
    rng::Stream stream(seed, "mplus", index * 64 + restart);
    auto x = project_to_Mplus_from(geom, stream.unit_vector(geom.ambient_dim()));
    if (x) return *x;
  }
  fail("newton-divergence", "M_+ sampler exhausted 32 restarts");
}

// ---------------------------------------------------------------------------
// Focal maps between M_+ and the critical sets N_+/N_- of phi2 on M^n:
//   h_sign(x) = cos t x + sin t P x,   j(y) = cos t y + sin t xi(y),
// with cos t = sqrt((1 + sqrt((1+c0)/2))/2) and sin t carrying the sign.
// j inverts both h_+ and h_-; the normal xi points back toward M_+ from
// either side, so the + square root is the right branch for both.
// ---------------------------------------------------------------------------

inline double focal_cos_t(const FkmGeometry& geom) {
  return std::sqrt(0.5 * (1.0 + std::sqrt((1.0 + geom.minimal_level) / 2.0)));
}

inline double focal_sin_t(const FkmGeometry& geom) {
  return std::sqrt(0.5 * (1.0 - std::sqrt((1.0 + geom.minimal_level) / 2.0)));
}

inline Vector focal_map_h(const FkmGeometry& geom, const SphereElement& p, int sign,
                          const Vector& x_on_mplus) {
  const double st = static_cast<double>(sign) * focal_sin_t(geom);
  return focal_cos_t(geom) * x_on_mplus + st * (p.matrix * x_on_mplus);
}

inline Vector focal_map_j(const FkmGeometry& geom, const Vector& y_on_npm) {
  return focal_cos_t(geom) * y_on_npm + focal_sin_t(geom) * geom.unit_normal(y_on_npm);
}

inline Vector sample_Npm(const FkmGeometry& geom, const SphereElement& p, int sign,
                         std::uint64_t seed, std::uint64_t index = 0) {
  return focal_map_h(geom, p, sign, sample_Mplus(geom, seed, index));
}

// ---------------------------------------------------------------------------
// Tangent frames.  Analytic spanning sets, orthonormalized by Householder QR
// (and a modified Gram-Schmidt re-orthogonalization pass for mixed blocks).
// ---------------------------------------------------------------------------

struct TangentFrame {
  Vector point;
  VarietyTag tag;
  Matrix basis;                 // ambient_dim x dim, orthonormal columns
  std::optional<Vector> normal; // unit normal within the sphere (Mn only)

  int dim() const { return static_cast<int>(basis.cols()); }
};

namespace detail {

// columns of q beyond the pinned block, i.e. an ONB of the orthogonal
// complement of span(pinned) restricted to take `count` vectors
inline Matrix orthogonal_complement(const Matrix& pinned, int count) {
  Eigen::HouseholderQR<Matrix> qr(pinned);
  const Matrix q = qr.householderQ();
  return q.rightCols(q.cols() - pinned.cols()).leftCols(count);
}

inline void gram_schmidt_pass(Matrix& b) {
  for (int j = 0; j < b.cols(); ++j) {
    for (int i = 0; i < j; ++i) b.col(j) -= b.col(i).dot(b.col(j)) * b.col(i);
    b.col(j).normalize();
  }
}

}  // namespace detail

inline TangentFrame tangent_frame(const FkmGeometry& geom, const Vector& x,
                                  const VarietyTag& tag) {
  const double res = membership_residual(geom, x, tag);
  require(res < 1e-8, "wrong-variety",
          "point is off " + variety_name(tag.kind) + " by " + std::to_string(res));
  const int dim = geom.ambient_dim();
  TangentFrame frame{x, tag, Matrix(), std::nullopt};

  switch (tag.kind) {
    case Variety::Sphere: {
      Matrix pinned(dim, 1);
      pinned.col(0) = x;
      frame.basis = detail::orthogonal_complement(pinned, dim - 1);
      break;
    }
    case Variety::Mn: {
      const Vector xi = geom.unit_normal(x);
      Matrix pinned(dim, 2);
      pinned.col(0) = x;
      pinned.col(1) = xi;
      frame.basis = detail::orthogonal_complement(pinned, dim - 2);
      frame.normal = xi;
      break;
    }
    case Variety::Mplus: {
      Matrix pinned(dim, geom.system.m + 2);
      pinned.col(0) = x;
      for (int a = 0; a <= geom.system.m; ++a)
        pinned.col(a + 1) = geom.system.generators[a] * x;
      frame.basis = detail::orthogonal_complement(pinned, dim - geom.system.m - 2);
      break;
    }
    case Variety::Mminus: {
      // T_x M_- = (E_+(P(x)) ∩ x^perp) ⊕ { Q x : Q ⊥ P(x) in the span }
      const Vector s = geom.quadratic_forms(x);
      const auto script_p = sphere_element(geom.system, s);
      const Matrix proj_plus =
          0.5 * (Matrix::Identity(dim, dim) + script_p.matrix);
      Matrix plus_block(dim, geom.system.l - 1);
      {
        Matrix px(dim, 1);
        px.col(0) = x;
        Eigen::HouseholderQR<Matrix> qx(px);
        const Matrix cand = Matrix(qx.householderQ()).rightCols(dim - 1);  // ONB of x^perp
        // project into E_+ and re-orthonormalize; spans E_+ ∩ x^perp
        Matrix projected = proj_plus * cand;
        Eigen::ColPivHouseholderQR<Matrix> qr2(projected);
        require(qr2.rank() >= geom.system.l - 1, "rank-deficiency",
                "E_+ ∩ x^perp has unexpected rank");
        plus_block = Matrix(qr2.householderQ()).leftCols(geom.system.l - 1);
      }
      // complete s to an ONB {s, b_1..b_m} of R^{m+1}
      Matrix sb(geom.system.m + 1, 1);
      sb.col(0) = s.normalized();
      Eigen::HouseholderQR<Matrix> qs(sb);
      const Matrix bperp = Matrix(qs.householderQ()).rightCols(geom.system.m);
      Matrix minus_block(dim, geom.system.m);
      for (int j = 0; j < geom.system.m; ++j) {
        const auto qj = sphere_element(geom.system, bperp.col(j));
        minus_block.col(j) = qj.matrix * x;
      }
      frame.basis.resize(dim, geom.system.l - 1 + geom.system.m);
      frame.basis << plus_block, minus_block;
      detail::gram_schmidt_pass(frame.basis);
      detail::gram_schmidt_pass(frame.basis);  // re-orthogonalization
      break;
    }
    case Variety::Nplus:
    case Variety::Nminus: {
      // push a frame of T M_+ through dh: v -> cos t v + sin t P v
      require(tag.element.has_value(), "invalid-argument",
              "N_+/N_- frame needs the defining sphere element");
      const Vector p_on_mplus = focal_map_j(geom, x);
      const auto base = tangent_frame(geom, p_on_mplus, Variety::Mplus);
      const double st =
          (tag.kind == Variety::Nplus ? 1.0 : -1.0) * focal_sin_t(geom);
      Matrix pushed = focal_cos_t(geom) * base.basis +
                      st * (tag.element->matrix * base.basis);
      detail::gram_schmidt_pass(pushed);
      detail::gram_schmidt_pass(pushed);
      frame.basis = pushed;
      break;
    }
    case Variety::Vplus:
    case Variety::Vminus: {
      require(tag.element.has_value(), "invalid-argument",
              "V_+/V_- frame needs the defining sphere element");
      const double sign = tag.kind == Variety::Vplus ? 1.0 : -1.0;
      const Matrix proj =
          0.5 * (Matrix::Identity(dim, dim) + sign * tag.element->matrix);
      Matrix px(dim, 1);
      px.col(0) = x;
      Eigen::HouseholderQR<Matrix> qx(px);
      const Matrix cand = Matrix(qx.householderQ()).rightCols(dim - 1);
      Matrix projected = proj * cand;
      Eigen::ColPivHouseholderQR<Matrix> qr(projected);
      require(qr.rank() >= geom.system.l - 1, "rank-deficiency",
              "eigenspace ∩ x^perp has unexpected rank");
      frame.basis = Matrix(qr.householderQ()).leftCols(geom.system.l - 1);
      break;
    }
  }
  return frame;
}

// Normal space of M_- at x within the sphere:
// { nu in E_-(P(x)) : <nu, Q x> = 0 for all Q orthogonal to P(x) }.
inline Matrix normal_frame_Mminus(const FkmGeometry& geom, const Vector& x) {
  const double res = membership_residual(geom, x, Variety::Mminus);
  require(res < 1e-8, "wrong-variety", "point is off M_- by " + std::to_string(res));
  const int dim = geom.ambient_dim();
  const Vector s = geom.quadratic_forms(x);
  const auto script_p = sphere_element(geom.system, s);

  // pinned block: the m vectors Q_j x spanning E_- ∩ (normal space)^perp
  Matrix sb(geom.system.m + 1, 1);
  sb.col(0) = s.normalized();
  Eigen::HouseholderQR<Matrix> qs(sb);
  const Matrix bperp = Matrix(qs.householderQ()).rightCols(geom.system.m);
  Matrix pinned(dim, geom.system.m);
  for (int j = 0; j < geom.system.m; ++j)
    pinned.col(j) = sphere_element(geom.system, bperp.col(j)).matrix * x;

  const Matrix proj_minus = 0.5 * (Matrix::Identity(dim, dim) - script_p.matrix);
  Matrix candidates = proj_minus * detail::orthogonal_complement(pinned, dim - geom.system.m);
  Eigen::ColPivHouseholderQR<Matrix> qr(candidates);
  const int want = geom.system.l - geom.system.m;
  require(qr.rank() >= want, "rank-deficiency", "normal space has unexpected rank");
  return Matrix(qr.householderQ()).leftCols(want);
}

// Retractions used by finite-difference probes; both land exactly on the
// variety and fix tangent vectors to first order.
inline Vector retract_Mn(const FkmGeometry& geom, const Vector& y) {
  const Vector yn = y.normalized();
  // local Newton along the normal geodesic; falls back to the full projector
  const double f0 = geom.sphere_level(yn);
  if (1.0 - f0 * f0 > 1e-8) {
    const Vector xi0 = geom.unit_normal(yn);
    double t = 0.0;
    for (int it = 0; it < 12; ++it) {
      const Vector p = std::cos(t) * yn + std::sin(t) * xi0;
      const double gt = geom.sphere_level(p) - geom.minimal_level;
      if (std::abs(gt) < 1e-14)
        return p.normalized();
      const Vector dp = -std::sin(t) * yn + std::cos(t) * xi0;
      const double d = geom.quartic_grad(p).dot(dp);
      if (std::abs(d) < 1e-10) break;
      t -= gt / d;
      if (std::abs(t) > 0.5) break;  // too far for the local path
    }
  }
  return project_to_level(geom, yn, geom.minimal_level);
}

inline Vector retract_Mminus(const FkmGeometry& geom, const Vector& y) {
  const Vector yn = y.normalized();
  Vector s = geom.quadratic_forms(yn);
  const double norm = s.norm();
  require(norm > 1e-8, "degenerate-start", "retraction target too far from M_-");
  const auto script_p = sphere_element(geom.system, s / norm);
  Vector x = 0.5 * (yn + script_p.matrix * yn);
  return x.normalized();
}

}  // namespace fkmlab
