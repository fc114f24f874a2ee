#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <json.hpp>

#include "fkmlab/error.hpp"
#include "fkmlab/report.hpp"
#include "fkmlab/rng.hpp"

namespace fkmlab {

// Dimension of an irreducible module of the Clifford algebra C_{m-1}:
// 1, 2, 4, 4, 8, 8, 8, 8 for m = 1..8, then delta(m+8) = 16 delta(m).
inline int delta(int m) {
  require(m >= 1, "invalid-argument", "delta(m) needs m >= 1, got " + std::to_string(m));
  static constexpr int table[8] = {1, 2, 4, 4, 8, 8, 8, 8};
  long long scale = 1;
  while (m > 8) {
    m -= 8;
    scale *= 16;
  }
  return static_cast<int>(scale * table[m - 1]);
}

// A symmetric Clifford system {P_0,...,P_m} on R^{2l}:
// P_a = P_a^T and P_a P_b + P_b P_a = 2 delta_ab I.
struct CliffordSystem {
  int m = 0;
  int k = 0;
  int l = 0;  // l = k * delta(m)
  std::string realization;
  std::vector<Eigen::MatrixXd> generators;  // P_0..P_m, each 2l x 2l

  int ambient_dim() const { return 2 * l; }
  int m_plus() const { return m; }
  int m_minus() const { return l - m - 1; }
};

namespace detail {

// Basis products e_i * e_j = sign * e_k in the Cayley-Dickson algebra of
// dimension 2^level (reals, complexes, quaternions, octonions, ...), with
// the doubling rule (a,b)(c,d) = (ac - d*b, da + bc*).
inline std::pair<int, int> cayley_dickson_mul(int level, int i, int j) {
  if (level == 0) return {1, 0};
  const int h = 1 << (level - 1);
  const bool ih = i >= h, jh = j >= h;
  if (!ih && !jh) return cayley_dickson_mul(level - 1, i, j);
  if (!ih && jh) {  // (a,0)(0,d) = (0, d a)
    auto [s, k] = cayley_dickson_mul(level - 1, j - h, i);
    return {s, k + h};
  }
  if (ih && !jh) {  // (0,b)(c,0) = (0, b c*)
    auto [s, k] = cayley_dickson_mul(level - 1, i - h, j);
    if (j != 0) s = -s;
    return {s, k + h};
  }
  // (0,b)(0,d) = (-d* b, 0); conjugation negates imaginary units only
  auto [s, k] = cayley_dickson_mul(level - 1, j - h, i - h);
  return {(j - h == 0) ? -s : s, k};
}

// Left multiplication by the imaginary unit e_idx (idx >= 1) on R^{2^level}.
// These are skew-symmetric, orthogonal, and pairwise anticommuting.
inline Eigen::MatrixXd left_multiplication(int level, int idx) {
  const int d = 1 << level;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    auto [s, k] = cayley_dickson_mul(level, idx, j);
    L(k, j) = static_cast<double>(s);
  }
  return L;
}

// count anticommuting complex structures required on R^{delta(m)}
inline std::vector<Eigen::MatrixXd> complex_structures(int m) {
  const int count = m - 1;
  if (count == 0) return {};
  if (count <= 7) {
    int level = 1;
    while ((1 << level) < delta(m)) ++level;
    std::vector<Eigen::MatrixXd> out;
    out.reserve(count);
    for (int i = 1; i <= count; ++i) out.push_back(left_multiplication(level, i));
    return out;
  }
  // Periodicity step: 8 structures G_1..G_8 on R^16 from doubled octonions,
  // then E'_i = G_i (x) I and E'_{8+j} = (G_1...G_8) (x) E_j.
  std::vector<Eigen::MatrixXd> g;
  const Eigen::MatrixXd id8 = Eigen::MatrixXd::Identity(8, 8);
  Eigen::Matrix2d diag_pm, rot;
  diag_pm << 1, 0, 0, -1;
  rot << 0, -1, 1, 0;
  for (int i = 1; i <= 7; ++i)
    g.push_back(Eigen::kroneckerProduct(diag_pm, left_multiplication(3, i)).eval());
  g.push_back(Eigen::kroneckerProduct(rot, id8).eval());
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(16, 16);
  for (const auto& gi : g) w = (w * gi).eval();

  const auto base = complex_structures(m - 8);
  const int d0 = delta(m - 8);
  const Eigen::MatrixXd id0 = Eigen::MatrixXd::Identity(d0, d0);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(count);
  for (const auto& gi : g) out.push_back(Eigen::kroneckerProduct(gi, id0).eval());
  for (const auto& ej : base) out.push_back(Eigen::kroneckerProduct(w, ej).eval());
  return out;
}

}  // namespace detail

// Deterministic construction with exact {-1,0,+1} entries:
//   P_0 = diag(I_l, -I_l),  P_1 = antidiag(I_l, I_l),
//   P_{1+i}(u,v) = (E_i v, -E_i u)
// where E_1..E_{m-1} are anticommuting complex structures on R^l built from
// Cayley-Dickson left multiplications (blocked up by I_k).
inline CliffordSystem build_clifford_system(int m, int k) {
  require(m >= 1 && k >= 1, "invalid-argument",
          "build_clifford_system needs m >= 1 and k >= 1, got m=" + std::to_string(m) +
              " k=" + std::to_string(k));
  const int l = k * delta(m);
  require(l - m - 1 > 0, "invalid-fkm-pair",
          "(m,k)=(" + std::to_string(m) + "," + std::to_string(k) + ") gives l=" +
              std::to_string(l) + " and m_minus=" + std::to_string(l - m - 1) +
              " <= 0; not a valid FKM pair");

  CliffordSystem sys;
  sys.m = m;
  sys.k = k;
  sys.l = l;
  sys.realization = "cayley-dickson left multiplications, block-doubled to R^{2l}";

  const Eigen::MatrixXd idl = Eigen::MatrixXd::Identity(l, l);
  const Eigen::MatrixXd idk = Eigen::MatrixXd::Identity(k, k);

  Eigen::MatrixXd p(2 * l, 2 * l);
  p.setZero();
  p.topLeftCorner(l, l) = idl;
  p.bottomRightCorner(l, l) = -idl;
  sys.generators.push_back(p);

  p.setZero();
  p.topRightCorner(l, l) = idl;
  p.bottomLeftCorner(l, l) = idl;
  sys.generators.push_back(p);

  for (const auto& e_small : detail::complex_structures(m)) {
    const Eigen::MatrixXd e = Eigen::kroneckerProduct(e_small, idk).eval();
    p.setZero();
    p.topRightCorner(l, l) = e;
    p.bottomLeftCorner(l, l) = -e;
    sys.generators.push_back(p);
  }
  return sys;
}

// Max residual over symmetry, anticommutation and P_a^2 = I.
inline VerificationReport verify_clifford(const CliffordSystem& sys, double tol,
                                          std::uint64_t seed = 0) {
  const int dim = sys.ambient_dim();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
  ResidualStats stats;
  double sym = 0.0, anti = 0.0;
  for (std::size_t a = 0; a < sys.generators.size(); ++a) {
    const auto& pa = sys.generators[a];
    sym = std::max(sym, (pa - pa.transpose()).cwiseAbs().maxCoeff());
    for (std::size_t b = a; b < sys.generators.size(); ++b) {
      const auto& pb = sys.generators[b];
      Eigen::MatrixXd r = pa * pb + pb * pa;
      if (a == b) r -= 2.0 * id;
      const double res = r.cwiseAbs().maxCoeff();
      anti = std::max(anti, res);
      stats.add(res);
    }
    stats.add(sym);
  }
  auto report = VerificationReport::from_stats("clifford_axioms",
                                               {sys.m, sys.k, sys.l}, seed, stats, tol);
  report.details["symmetry_residual"] = sym;
  report.details["anticommutation_residual"] = anti;
  report.details["realization"] = sys.realization;
  return report;
}

// A point of the Clifford sphere Sigma: P = sum_b a_b P_b with |a| = 1.
struct SphereElement {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd matrix;
};

inline SphereElement sphere_element(const CliffordSystem& sys, Eigen::VectorXd a) {
  require(a.size() == sys.m + 1, "invalid-argument",
          "coefficient vector must have m+1 entries");
  const double norm = a.norm();
  require(std::abs(norm - 1.0) <= 1e-8, "invalid-argument",
          "coefficients must be a unit vector (|a| = " + std::to_string(norm) + ")");
  a /= norm;
  SphereElement e;
  e.coefficients = a;
  e.matrix = Eigen::MatrixXd::Zero(sys.ambient_dim(), sys.ambient_dim());
  for (int b = 0; b <= sys.m; ++b) e.matrix += a[b] * sys.generators[b];
  return e;
}

// Properties of the Clifford sphere: P(a)^2 = I, trace P(a) = 0, and the
// bilinear anticommutation P(a)P(b) + P(b)P(a) = 0 for a perpendicular to b.
inline VerificationReport verify_sigma_sphere(const CliffordSystem& sys, std::uint64_t seed,
                                              int samples, double tol) {
  const int dim = sys.ambient_dim();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
  ResidualStats stats;
  for (int i = 0; i < samples; ++i) {
    rng::Stream stream(seed, "sigma.sphere", i);
    const Eigen::VectorXd a = stream.unit_vector(sys.m + 1);
    Eigen::VectorXd b = stream.gaussian_vector(sys.m + 1);
    b -= a.dot(b) * a;
    const auto pa = sphere_element(sys, a);
    stats.add((pa.matrix * pa.matrix - id).cwiseAbs().maxCoeff());
    stats.add(std::abs(pa.matrix.trace()) / dim);
    if (b.norm() > 1e-8) {
      const auto pb = sphere_element(sys, Eigen::VectorXd(b.normalized()));
      stats.add((pa.matrix * pb.matrix + pb.matrix * pa.matrix).cwiseAbs().maxCoeff());
    }
  }
  return VerificationReport::from_stats("clifford_sigma_sphere", {sys.m, sys.k, sys.l},
                                        seed, stats, tol);
}

inline nlohmann::ordered_json to_json(const CliffordSystem& sys) {
  nlohmann::ordered_json j;
  j["m"] = sys.m;
  j["k"] = sys.k;
  j["l"] = sys.l;
  j["realization"] = sys.realization;
  auto mats = nlohmann::ordered_json::array();
  for (const auto& p : sys.generators) {
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(p.size()));
    for (int r = 0; r < p.rows(); ++r)
      for (int c = 0; c < p.cols(); ++c) row_major.push_back(p(r, c));
    mats.push_back(row_major);
  }
  j["matrices"] = std::move(mats);
  return j;
}

}  // namespace fkmlab
