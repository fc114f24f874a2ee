#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fkmlab/calculus.hpp"
#include "fkmlab/clifford.hpp"
#include "fkmlab/error.hpp"
#include "fkmlab/fkm.hpp"
#include "fkmlab/morse.hpp"
#include "fkmlab/report.hpp"
#include "fkmlab/spectra.hpp"
#include "fkmlab/varieties.hpp"

namespace fkmlab {

// ---------------------------------------------------------------------------
// Campaign configuration and orchestration: clifford -> fkm -> spectra ->
// morse per configuration, one report file per suite, nonzero exit on any
// failed check.
// ---------------------------------------------------------------------------

struct RunConfig {
  std::vector<std::pair<int, int>> configurations = {{1, 3}, {2, 2}, {3, 2}};
  std::uint64_t seed = 20250809;
  int samples = 200;
  int draws = 20;  // generic parameter draws for the critical-point counts
  std::map<std::string, double> tol_overrides;
  std::string out_dir = "reports";
  std::string format = "json";  // json | csv | human
  std::string dump_samples;     // optional CSV of sampled points
};

inline const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> tols = {
      {"clifford_axioms", 1e-12},
      {"clifford_sigma_sphere", 1e-12},
      {"fkm_spherical_gradient", 1e-9},
      {"fkm_euler_identity", 1e-12},
      {"fkm_symmetry_invariance", 1e-10},
      {"fkm_gradient_fd", 1e-6},
      {"fkm_hessian_fd", 1e-6},
      {"fkm_xi_orthonormal", 1e-10},
      {"fkm_two_laplacian", 1e-8},
      {"eigen_phi1", 1e-6},
      {"eigen_phi2", 1e-6},
      {"eigen_phi3", 1e-4},
      {"eigen_omega1", 1e-6},
      {"eigen_omega2", 1e-6},
      {"isoparametric_phi2", 1e-8},
      {"isoparametric_omega1", 1e-8},
      {"gradient_phi2_closed_form", 1e-9},
      {"xi_phi2_identities", 1e-8},
      {"phi2_range_bound", 1e-8},
      {"tangency_claim", 1e-9},
      {"critical_count_phi1", 0.5},
      {"critical_count_phi3", 0.5},
      {"critical_count_omega2", 0.5},
      {"hessian_closed_form_phi1", 1e-4},
      {"hessian_closed_form_phi3", 1e-4},
      {"focal_maps", 1e-10},
      {"critical_set_phi2", 1e-9},
      {"vpm_spheres", 1e-10},
      {"principal_curvatures", 1e-6},
      {"mean_curvature", 1e-5},
      {"counterexample_ordering", 0.5},
  };
  return tols;
}

inline double tolerance_for(const RunConfig& cfg, const std::string& id) {
  if (auto it = cfg.tol_overrides.find(id); it != cfg.tol_overrides.end())
    return it->second;
  const auto& defaults = default_tolerances();
  auto it = defaults.find(id);
  require(it != defaults.end(), "invalid-argument", "unknown check id: " + id);
  return it->second;
}

struct SuiteReport {
  std::string suite;
  ConfigId config;
  std::vector<VerificationReport> checks;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

struct CampaignResult {
  std::vector<SuiteReport> suites;
  std::vector<OrderingReport> ordering;  // configurations plus (1,5)
  std::vector<std::string> failed_ids;
  bool all_pass = true;
};

namespace campaign_detail {

inline std::vector<Vector> draw_points(const FkmGeometry& geom, Variety host,
                                       std::uint64_t seed, int count) {
  std::vector<Vector> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    switch (host) {
      case Variety::Sphere: pts.push_back(sample_sphere(geom, seed, i)); break;
      case Variety::Mn: pts.push_back(sample_Mn(geom, seed, i)); break;
      case Variety::Mminus: pts.push_back(sample_Mminus(geom, seed, i)); break;
      case Variety::Mplus: pts.push_back(sample_Mplus(geom, seed, i)); break;
      default: fail("invalid-argument", "no bulk sampler for this tag");
    }
  }
  return pts;
}

inline SuiteReport clifford_suite(const FkmGeometry& geom, const RunConfig& cfg) {
  SuiteReport suite{"clifford", geom.config(), {}, {}};
  suite.checks.push_back(verify_clifford(geom.system, tolerance_for(cfg, "clifford_axioms"),
                                         cfg.seed));
  suite.checks.push_back(verify_sigma_sphere(geom.system, cfg.seed,
                                             std::max(10, cfg.samples / 10),
                                             tolerance_for(cfg, "clifford_sigma_sphere")));
  suite.parameters["realization"] = geom.system.realization;
  return suite;
}

inline SuiteReport fkm_suite(const FkmGeometry& geom, const RunConfig& cfg) {
  SuiteReport suite{"fkm", geom.config(), {}, {}};
  const std::uint64_t seed = cfg.seed;

  {  // |grad F - 4 F x|^2 = 16 (1 - F^2) on the unit sphere
    ResidualStats stats;
    for (int i = 0; i < std::max(1000, cfg.samples); ++i) {
      const Vector x = sample_sphere(geom, seed, i);
      const double f = geom.quartic(x);
      const double lhs = (geom.quartic_grad(x) - 4.0 * f * x).squaredNorm();
      stats.add(lhs - 16.0 * (1.0 - f * f));
    }
    suite.checks.push_back(VerificationReport::from_stats(
        "fkm_spherical_gradient", geom.config(), seed, stats,
        tolerance_for(cfg, "fkm_spherical_gradient")));
  }

  {  // degree-4 Euler identity
    ResidualStats stats;
    for (int i = 0; i < cfg.samples; ++i) {
      const Vector x = sample_sphere(geom, seed + 1, i);
      stats.add(geom.quartic_grad(x).dot(x) - 4.0 * geom.quartic(x));
    }
    suite.checks.push_back(VerificationReport::from_stats(
        "fkm_euler_identity", geom.config(), seed, stats,
        tolerance_for(cfg, "fkm_euler_identity")));
  }

  {  // F(-x) = F(x) and F(P_a x) = F(x)
    ResidualStats stats;
    for (int i = 0; i < std::max(10, cfg.samples / 4); ++i) {
      const Vector x = sample_sphere(geom, seed + 2, i);
      const double f = geom.quartic(x);
      stats.add(geom.quartic(Vector(-x)) - f);
      for (const auto& p : geom.system.generators)
        stats.add(geom.quartic(Vector(p * x)) - f);
    }
    suite.checks.push_back(VerificationReport::from_stats(
        "fkm_symmetry_invariance", geom.config(), seed, stats,
        tolerance_for(cfg, "fkm_symmetry_invariance")));
  }

  {  // central finite differences as an independent derivative oracle
    ResidualStats grad_stats, hess_stats;
    const double h = 1e-5;
    const int dim = geom.ambient_dim();
    for (int i = 0; i < std::min(10, std::max(2, cfg.samples / 40)); ++i) {
      const Vector x = sample_sphere(geom, seed + 3, i);
      const Vector grad = geom.quartic_grad(x);
      const Matrix hess = geom.quartic_hess(x);
      for (int j = 0; j < dim; ++j) {
        Vector e = Vector::Zero(dim);
        e[j] = 1.0;
        grad_stats.add((geom.quartic(x + h * e) - geom.quartic(x - h * e)) / (2 * h) -
                       grad[j]);
        const Vector col =
            (geom.quartic_grad(x + h * e) - geom.quartic_grad(x - h * e)) / (2 * h);
        hess_stats.add((col - hess.col(j)).cwiseAbs().maxCoeff());
      }
    }
    suite.checks.push_back(VerificationReport::from_stats(
        "fkm_gradient_fd", geom.config(), seed, grad_stats,
        tolerance_for(cfg, "fkm_gradient_fd")));
    suite.checks.push_back(VerificationReport::from_stats(
        "fkm_hessian_fd", geom.config(), seed, hess_stats,
        tolerance_for(cfg, "fkm_hessian_fd")));
  }

  {  // unit normal: |xi| = 1 and xi orthogonal to x at regular points
    ResidualStats stats;
    for (int i = 0; i < cfg.samples; ++i) {
      const Vector x = sample_regular(geom, seed + 4, i);
      const Vector xi = geom.unit_normal(x);
      stats.add(xi.norm() - 1.0);
      stats.add(xi.dot(x));
    }
    suite.checks.push_back(VerificationReport::from_stats(
        "fkm_xi_orthonormal", geom.config(), seed, stats,
        tolerance_for(cfg, "fkm_xi_orthonormal")));
  }

  {  // ambient-vs-spherical Laplacian relation for linear and quadratic fields
    ResidualStats stats;
    rng::Stream stream(seed + 5, "fkm.eq7");
    const Vector q = stream.unit_vector(geom.ambient_dim());
    const auto p = sphere_element(geom.system, stream.unit_vector(geom.system.m + 1));
    const int dim = geom.ambient_dim();
    ScalarField linear{"linear", Variety::Mn,
                       [q](const Vector& x) { return x.dot(q); },
                       [q](const Vector&) { return q; },
                       [dim](const Vector&) { return Matrix(Matrix::Zero(dim, dim)); }};
    const Matrix pm = p.matrix;
    ScalarField quad{"quadratic", Variety::Mn,
                     [pm](const Vector& x) { return x.dot(pm * x); },
                     [pm](const Vector& x) { return Vector(2.0 * (pm * x)); },
                     [pm](const Vector&) { return Matrix(2.0 * pm); }};
    for (int i = 0; i < cfg.samples; ++i) {
      const Vector x = sample_sphere(geom, seed + 5, i);
      stats.add(two_laplacian_residual(geom, linear, x));
      stats.add(two_laplacian_residual(geom, quad, x));
    }
    suite.checks.push_back(VerificationReport::from_stats(
        "fkm_two_laplacian", geom.config(), seed, stats,
        tolerance_for(cfg, "fkm_two_laplacian")));
  }
  return suite;
}

inline SuiteReport spectra_suite(const FkmGeometry& geom, const RunConfig& cfg,
                                 const SphereElement& p, const Vector& q1,
                                 const Vector& q2) {
  SuiteReport suite{"spectra", geom.config(), {}, {}};
  const std::uint64_t seed = cfg.seed;
  suite.parameters["sigma_coefficients"] = std::vector<double>(
      p.coefficients.data(), p.coefficients.data() + p.coefficients.size());
  suite.parameters["q1"] = std::vector<double>(q1.data(), q1.data() + q1.size());
  suite.parameters["q2"] = std::vector<double>(q2.data(), q2.data() + q2.size());

  const auto on_mn = draw_points(geom, Variety::Mn, seed + 10, cfg.samples);
  const auto on_mminus = draw_points(geom, Variety::Mminus, seed + 11, cfg.samples);

  suite.checks.push_back(verify_eigen_identity(geom, make_phi1(geom, q1), on_mn,
                                               tolerance_for(cfg, "eigen_phi1"), seed));
  suite.checks.push_back(verify_eigen_identity(geom, make_phi2(geom, p), on_mn,
                                               tolerance_for(cfg, "eigen_phi2"), seed));
  suite.checks.push_back(verify_eigen_identity(geom, make_phi3(geom, q1), on_mn,
                                               tolerance_for(cfg, "eigen_phi3"), seed));
  suite.checks.push_back(verify_eigen_identity(geom, make_omega1(geom, p), on_mminus,
                                               tolerance_for(cfg, "eigen_omega1"), seed));
  suite.checks.push_back(verify_eigen_identity(geom, make_omega2(geom, q2), on_mminus,
                                               tolerance_for(cfg, "eigen_omega2"), seed));

  suite.checks.push_back(verify_isoparametric_system(
      geom, make_phi2(geom, p), on_mn, tolerance_for(cfg, "isoparametric_phi2"), seed));
  suite.checks.push_back(verify_isoparametric_system(
      geom, make_omega1(geom, p), on_mminus,
      tolerance_for(cfg, "isoparametric_omega1"), seed));

  suite.checks.push_back(verify_phi2_gradient_closed_form(
      geom, make_phi2(geom, p), on_mn,
      tolerance_for(cfg, "gradient_phi2_closed_form"), seed));

  {
    std::vector<Vector> regular;
    for (int i = 0; i < cfg.samples; ++i)
      regular.push_back(sample_regular(geom, seed + 12, i, 1e-4));
    suite.checks.push_back(verify_phi2_normal_derivatives(
        geom, p, regular, tolerance_for(cfg, "xi_phi2_identities"), seed));
  }

  {
    std::vector<Vector> npm;
    for (int i = 0; i < std::max(5, cfg.samples / 10); ++i) {
      npm.push_back(sample_Npm(geom, p, +1, seed + 13, i));
      npm.push_back(sample_Npm(geom, p, -1, seed + 13, i));
    }
    suite.checks.push_back(verify_phi2_range(geom, make_phi2(geom, p), on_mn, npm,
                                             tolerance_for(cfg, "phi2_range_bound"),
                                             seed));
  }

  suite.checks.push_back(verify_tangency_claim(geom, p, on_mminus,
                                               tolerance_for(cfg, "tangency_claim"),
                                               seed));

  {  // eigenvalue ordering catalogue for this configuration
    const auto ordering = counterexample_ordering(geom);
    ResidualStats stats;
    const bool flag_consistent =
        ordering.omega_order_flipped ==
        (4 * geom.system.m < geom.system.l + geom.system.m - 1);
    stats.add(flag_consistent ? 0.0 : 1.0);
    auto rep = VerificationReport::from_stats(
        "counterexample_ordering", geom.config(), seed, stats,
        tolerance_for(cfg, "counterexample_ordering"));
    rep.details = to_json(ordering);
    suite.checks.push_back(rep);
  }
  return suite;
}

inline SuiteReport morse_suite(const FkmGeometry& geom, const RunConfig& cfg,
                               const SphereElement& p) {
  SuiteReport suite{"morse", geom.config(), {}, {}};
  const std::uint64_t seed = cfg.seed;

  // critical-point counts and Hessian classification over generic draws
  {
    ResidualStats count1, count3, count_omega, hess1, hess3;
    double min_diag = std::numeric_limits<double>::infinity();
    int sign1 = 0, sign3 = 0;
    bool signs_consistent = true;
    for (int draw = 0; draw < cfg.draws; ++draw) {
      const Vector q1 = draw_generic_q1(geom, seed + 20, draw);
      const auto pts = critical_points_normal_geodesic(geom, q1);
      count1.add(static_cast<double>(pts.size()) - 8.0);
      count3.add(static_cast<double>(pts.size()) - 8.0);
      for (const auto& x : pts) {
        const auto c1 = classify(geom, x, Eigenfunction::Phi1, q1);
        const auto c3 = classify(geom, x, Eigenfunction::Phi3, q1);
        hess1.add(c1.fd_relative_error);
        hess3.add(c3.fd_relative_error);
        min_diag = std::min({min_diag, c1.hessian_diagonal.cwiseAbs().minCoeff(),
                             c3.hessian_diagonal.cwiseAbs().minCoeff()});
        if (sign1 == 0) sign1 = c1.closed_form_sign;
        if (sign3 == 0) sign3 = c3.closed_form_sign;
        if (c1.closed_form_sign != sign1 || c3.closed_form_sign != sign3)
          signs_consistent = false;
      }

      const Vector q2 = draw_generic_q2(geom, seed + 21, draw);
      const auto pts2 = critical_points_omega2(geom, q2);
      count_omega.add(static_cast<double>(pts2.size()) - 4.0);
      for (const auto& x : pts2) {
        const auto c = classify_omega2(geom, x, q2);
        min_diag = std::min(min_diag, c.hessian_diagonal.cwiseAbs().minCoeff());
      }
    }

    auto rep1 = VerificationReport::from_stats("critical_count_phi1", geom.config(),
                                               seed, count1,
                                               tolerance_for(cfg, "critical_count_phi1"));
    rep1.details["expected"] = 8;
    rep1.details["min_abs_hessian_diagonal"] = min_diag;
    rep1.pass = rep1.pass && min_diag > kDegenerateDiagonal;
    suite.checks.push_back(rep1);

    auto rep3 = VerificationReport::from_stats("critical_count_phi3", geom.config(),
                                               seed, count3,
                                               tolerance_for(cfg, "critical_count_phi3"));
    rep3.details["expected"] = 8;
    suite.checks.push_back(rep3);

    auto repo = VerificationReport::from_stats(
        "critical_count_omega2", geom.config(), seed, count_omega,
        tolerance_for(cfg, "critical_count_omega2"));
    repo.details["expected"] = 4;
    suite.checks.push_back(repo);

    auto reph1 = VerificationReport::from_stats(
        "hessian_closed_form_phi1", geom.config(), seed, hess1,
        tolerance_for(cfg, "hessian_closed_form_phi1"));
    reph1.details["global_sign_vs_printed_form"] = sign1;
    reph1.details["signs_consistent"] = signs_consistent;
    reph1.pass = reph1.pass && signs_consistent;
    suite.checks.push_back(reph1);

    auto reph3 = VerificationReport::from_stats(
        "hessian_closed_form_phi3", geom.config(), seed, hess3,
        tolerance_for(cfg, "hessian_closed_form_phi3"));
    reph3.details["global_sign_vs_printed_form"] = sign3;
    reph3.details["signs_consistent"] = signs_consistent;
    reph3.pass = reph3.pass && signs_consistent;
    suite.checks.push_back(reph3);
  }

  {  // focal maps: j o h identity, level value, rank of dh
    ResidualStats stats;
    const double target = geom.phi2_critical_value();
    int min_rank = geom.ambient_dim();
    for (int sign : {+1, -1}) {
      for (int i = 0; i < std::max(10, cfg.samples / 8); ++i) {
        const Vector x = sample_Mplus(geom, seed + 22, i);
        const Vector y = focal_map_h(geom, p, sign, x);
        stats.add((focal_map_j(geom, y) - x).norm());
        stats.add(y.dot(p.matrix * y) - sign * target);
        const auto bframe = tangent_frame(geom, x, Variety::Mplus);
        const Matrix dh = focal_cos_t(geom) * bframe.basis +
                          sign * focal_sin_t(geom) * (p.matrix * bframe.basis);
        Eigen::JacobiSVD<Matrix> svd(dh);
        int rank = 0;
        for (int j = 0; j < svd.singularValues().size(); ++j)
          if (svd.singularValues()[j] > 1e-8 * svd.singularValues()[0]) ++rank;
        min_rank = std::min(min_rank, rank);
      }
    }
    auto rep = VerificationReport::from_stats("focal_maps", geom.config(), seed, stats,
                                              tolerance_for(cfg, "focal_maps"));
    rep.details["dh_rank"] = min_rank;
    rep.details["dh_rank_expected"] = geom.n - geom.system.m;
    rep.pass = rep.pass && min_rank == geom.n - geom.system.m;
    suite.checks.push_back(rep);
  }

  suite.checks.push_back(verify_critical_set_phi2(
      geom, p, seed + 23, cfg.samples, tolerance_for(cfg, "critical_set_phi2")));

  suite.checks.push_back(verify_Vpm_spheres(geom, p, seed + 24,
                                            std::max(10, cfg.samples / 8),
                                            tolerance_for(cfg, "vpm_spheres")));

  {  // principal curvatures: values, multiplicities, trace, |B|^2, spread
    ResidualStats stats;
    const auto expected = expected_principal_curvatures(geom);
    Vector reference;
    double spread = 0.0, trace_max = 0.0, frob_max = 0.0;
    bool mults_ok = true;
    for (int i = 0; i < 50; ++i) {
      const Vector x = sample_Mn(geom, seed + 25, i);
      const auto frame = tangent_frame(geom, x, Variety::Mn);
      const auto spec = principal_curvatures(geom, frame);
      if (spec.values.size() != expected.size()) {
        mults_ok = false;
        continue;
      }
      for (std::size_t j = 0; j < expected.size(); ++j) {
        stats.add(spec.values[j].first - expected[j].first);
        if (spec.values[j].second != expected[j].second) mults_ok = false;
      }
      double trace = 0.0;
      for (int j = 0; j < spec.raw.size(); ++j) trace += spec.raw[j];
      trace_max = std::max(trace_max, std::abs(trace));
      frob_max = std::max(frob_max, std::abs(spec.raw.squaredNorm() - 3.0 * geom.n));
      stats.add(spec.raw.squaredNorm() - 3.0 * geom.n);
      if (i == 0)
        reference = spec.raw;
      else
        spread = std::max(spread, (spec.raw - reference).cwiseAbs().maxCoeff());
    }
    auto rep = VerificationReport::from_stats("principal_curvatures", geom.config(),
                                              seed, stats,
                                              tolerance_for(cfg, "principal_curvatures"));
    rep.details["multiplicities_ok"] = mults_ok;
    rep.details["trace_max"] = trace_max;
    rep.details["frobenius_sq_residual_max"] = frob_max;
    rep.details["spectrum_spread"] = spread;
    rep.details["theta1"] = geom.focal_angle();
    rep.pass = rep.pass && mults_ok && spread < 1e-7 && trace_max < 1e-8;
    suite.checks.push_back(rep);
  }

  {  // mean curvature of the phi2 levels: minimal in the improper case,
     // closed-form match otherwise
    ResidualStats stats;
    const auto spec = make_phi2(geom, p);
    const auto field = ambient_field(geom, spec);
    const double tmax = geom.phi2_critical_value();
    const int levels = 50;
    const bool improper = geom.system.m == 1;
    for (int i = 0; i < levels; ++i) {
      const double level = -0.9 * tmax + 1.8 * tmax * i / (levels - 1.0);
      if (!improper && std::abs(level) < 0.02 * tmax) continue;
      const Vector x =
          move_to_field_level(geom, field, sample_Mn(geom, seed + 26, i), level);
      const auto frame = tangent_frame(geom, x, Variety::Mn);
      const double numeric = level_mean_curvature(geom, field, frame);
      if (improper) {
        stats.add(numeric);
      } else {
        const double closed = mean_curvature_closed_form_phi2(geom, level);
        stats.add((numeric - closed) / closed);
      }
    }
    const double tol = cfg.tol_overrides.count("mean_curvature")
                           ? tolerance_for(cfg, "mean_curvature")
                           : (improper ? 1e-6 : tolerance_for(cfg, "mean_curvature"));
    auto rep = VerificationReport::from_stats("mean_curvature", geom.config(), seed,
                                              stats, tol);
    rep.details["improper_case"] = improper;
    rep.details["sign_convention"] = kMeanCurvatureSign;
    rep.details["metric"] = improper ? "absolute |h|" : "relative to closed form";
    suite.checks.push_back(rep);
  }
  return suite;
}

}  // namespace campaign_detail

inline void validate(const RunConfig& cfg) {
  require(!cfg.configurations.empty(), "invalid-argument", "no configurations given");
  for (auto [m, k] : cfg.configurations) {
    require(m >= 1 && k >= 1, "invalid-argument", "m and k must be positive");
    const int l = k * delta(m);
    require(l - m - 1 > 0, "invalid-fkm-pair",
            "(m,k)=(" + std::to_string(m) + "," + std::to_string(k) +
                ") fails the validity test l - m - 1 > 0");
  }
  require(cfg.samples >= 10, "invalid-argument", "samples-per-check must be >= 10");
  require(cfg.draws >= 1, "invalid-argument", "draws must be >= 1");
  require(cfg.format == "json" || cfg.format == "csv" || cfg.format == "human",
          "invalid-argument", "format must be json, csv or human");
  for (const auto& [id, tol] : cfg.tol_overrides) {
    (void)tol;
    require(default_tolerances().count(id) == 1, "invalid-argument",
            "unknown check id in tolerance override: " + id);
  }
}

inline CampaignResult run_campaign(const RunConfig& cfg) {
  validate(cfg);
  CampaignResult result;
  for (auto [m, k] : cfg.configurations) {
    const FkmGeometry geom(build_clifford_system(m, k));

    rng::Stream sigma_stream(cfg.seed, "sigma." + geom.config().name());
    const auto p = sphere_element(geom.system, sigma_stream.unit_vector(m + 1));
    const Vector q1 = draw_generic_q1(geom, cfg.seed);
    const Vector q2 = draw_generic_q2(geom, cfg.seed);

    result.suites.push_back(campaign_detail::clifford_suite(geom, cfg));
    result.suites.push_back(campaign_detail::fkm_suite(geom, cfg));
    result.suites.push_back(campaign_detail::spectra_suite(geom, cfg, p, q1, q2));
    result.suites.push_back(campaign_detail::morse_suite(geom, cfg, p));
    result.ordering.push_back(counterexample_ordering(geom));
  }
  {  // the (1,5) row exhibits 4m < l+m-1 even when not verified numerically
    bool have15 = false;
    for (auto [m, k] : cfg.configurations) have15 = have15 || (m == 1 && k == 5);
    if (!have15)
      result.ordering.push_back(
          counterexample_ordering(FkmGeometry(build_clifford_system(1, 5))));
  }

  for (const auto& suite : result.suites)
    for (const auto& check : suite.checks)
      if (!check.pass) {
        result.all_pass = false;
        result.failed_ids.push_back(suite.config.name() + "/" + check.identity_id);
      }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization of campaign output.  The timestamp lives in an isolated
// header object; everything below it is a pure function of (config, seed).
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json suite_to_json(const SuiteReport& suite,
                                            const RunConfig& cfg,
                                            bool with_timestamp = true) {
  nlohmann::ordered_json j;
  if (with_timestamp) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    j["header"] = {{"tool", "fkmlab"}, {"version", "0.1.0"}, {"timestamp", buf}};
  }
  j["suite"] = suite.suite;
  j["config"] = {{"m", suite.config.m}, {"k", suite.config.k}, {"l", suite.config.l}};
  j["seed"] = cfg.seed;
  j["samples_per_check"] = cfg.samples;
  if (!suite.parameters.empty()) j["parameters"] = suite.parameters;
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : suite.checks) checks.push_back(to_json(c));
  j["checks"] = std::move(checks);
  j["pass"] = suite.pass();
  return j;
}

inline std::string suite_to_csv(const SuiteReport& suite) {
  std::ostringstream os;
  os << csv_header() << '\n';
  for (const auto& c : suite.checks) os << to_csv_row(c) << '\n';
  return os.str();
}

inline std::string suite_to_human(const SuiteReport& suite) {
  std::ostringstream os;
  os << "suite " << suite.suite << "  config (m=" << suite.config.m
     << ", k=" << suite.config.k << ", l=" << suite.config.l << ")\n";
  for (const auto& c : suite.checks) os << human_row(c) << '\n';
  os << (suite.pass() ? "  all checks passed\n" : "  SUITE FAILED\n");
  return os.str();
}

inline std::vector<std::filesystem::path> write_reports(const CampaignResult& result,
                                                        const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  std::vector<fs::path> written;
  const std::string ext = cfg.format == "json" ? ".json"
                          : cfg.format == "csv" ? ".csv"
                                                : ".txt";
  for (const auto& suite : result.suites) {
    const fs::path path =
        fs::path(cfg.out_dir) / (suite.config.name() + "_" + suite.suite + ext);
    std::ofstream out(path);
    require(out.good(), "invalid-argument", "cannot write " + path.string());
    if (cfg.format == "json")
      out << suite_to_json(suite, cfg).dump(2) << '\n';
    else if (cfg.format == "csv")
      out << suite_to_csv(suite);
    else
      out << suite_to_human(suite);
    written.push_back(path);
  }
  {
    const fs::path path = fs::path(cfg.out_dir) / ("counterexample_ordering" + ext);
    std::ofstream out(path);
    if (cfg.format == "json") {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& o : result.ordering) arr.push_back(to_json(o));
      out << arr.dump(2) << '\n';
    } else {
      out << "host,function,eigenvalue,critical_set,expected_count,m,k,order_flipped\n";
      for (const auto& o : result.ordering)
        for (const auto& r : o.rows)
          out << r.host << ',' << r.function << ',' << r.eigenvalue << ",\""
              << r.critical_set << "\"," << r.expected_count << ',' << o.config.m << ','
              << o.config.k << ',' << (o.omega_order_flipped ? "true" : "false") << '\n';
    }
    written.push_back(path);
  }
  return written;
}

// Key-value config file mirroring the CLI flags; '#' starts a comment.
// Repeated m/k keys pair up in order of appearance.
inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "invalid-argument", "cannot read config file " + path);
  RunConfig cfg;
  cfg.configurations.clear();
  std::vector<int> ms, ks;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) continue;
    if (key == "m") ms.push_back(std::stoi(value));
    else if (key == "k") ks.push_back(std::stoi(value));
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "samples") cfg.samples = std::stoi(value);
    else if (key == "draws") cfg.draws = std::stoi(value);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "format") cfg.format = value;
    else if (key == "dump-samples") cfg.dump_samples = value;
    else if (key == "tol") {
      const auto sep = value.find('=');
      require(sep != std::string::npos, "invalid-argument",
              "tolerance override must be CHECK=VALUE: " + value);
      cfg.tol_overrides[trim(value.substr(0, sep))] =
          std::stod(trim(value.substr(sep + 1)));
    } else {
      fail("invalid-argument", "unknown config key: " + key);
    }
  }
  require(ms.size() == ks.size(), "invalid-argument",
          "m and k entries must come in pairs");
  for (std::size_t i = 0; i < ms.size(); ++i) cfg.configurations.emplace_back(ms[i], ks[i]);
  if (cfg.configurations.empty()) cfg.configurations = {{1, 3}, {2, 2}, {3, 2}};
  return cfg;
}

// environment override for the output directory only
inline void apply_environment(RunConfig& cfg) {
  if (const char* dir = std::getenv("FKMLAB_OUT"); dir != nullptr && *dir != '\0')
    cfg.out_dir = dir;
}

inline void dump_samples_csv(const FkmGeometry& geom, const RunConfig& cfg,
                             std::ostream& out) {
  out << "tag,residual";
  for (int i = 0; i < geom.ambient_dim(); ++i) out << ",x" << i;
  out << '\n';
  out.precision(17);
  const auto emit = [&](const char* tag, const Vector& x, double residual) {
    out << tag << ',' << residual;
    for (int i = 0; i < x.size(); ++i) out << ',' << x[i];
    out << '\n';
  };
  for (int i = 0; i < std::min(cfg.samples, 100); ++i) {
    const Vector a = sample_Mn(geom, cfg.seed + 30, i);
    emit("Mn", a, membership_residual(geom, a, Variety::Mn));
    const Vector b = sample_Mminus(geom, cfg.seed + 30, i);
    emit("Mminus", b, membership_residual(geom, b, Variety::Mminus));
    const Vector c = sample_Mplus(geom, cfg.seed + 30, i);
    emit("Mplus", c, membership_residual(geom, c, Variety::Mplus));
  }
}

}  // namespace fkmlab
