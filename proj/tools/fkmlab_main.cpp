// fkmlab command line: construction, verification campaigns, critical-point
// enumeration and mean-curvature scans for the FKM isoparametric family.
//
// Exit codes: 0 all checks passed, 1 verification failure, 2 invalid
// configuration, 3 numerical degeneracy exceeded the retry budget.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fkmlab/campaign.hpp"
#include "fkmlab/morse.hpp"

namespace {

using namespace fkmlab;

constexpr int kExitPass = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitDegeneracy = 3;

int exit_code_for(const Error& e) {
  const std::string& code = e.code();
  if (code == "invalid-argument" || code == "invalid-fkm-pair" || code == "wrong-variety")
    return kExitInvalidConfig;
  return kExitDegeneracy;
}

std::vector<std::pair<int, int>> zip_configs(const std::vector<int>& ms,
                                             const std::vector<int>& ks) {
  require(ms.size() == ks.size(), "invalid-argument",
          "--m and --k must be given the same number of times");
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < ms.size(); ++i) out.emplace_back(ms[i], ks[i]);
  return out;
}

void apply_tol_overrides(RunConfig& cfg, const std::vector<std::string>& tols) {
  for (const auto& spec : tols) {
    const auto sep = spec.find('=');
    require(sep != std::string::npos, "invalid-argument",
            "--tol expects CHECK=VALUE, got: " + spec);
    cfg.tol_overrides[spec.substr(0, sep)] = std::stod(spec.substr(sep + 1));
  }
}

int run_build(int m, int k, const std::string& dump_path) {
  const auto sys = build_clifford_system(m, k);
  const auto report = verify_clifford(sys, 1e-12);
  std::cout << "clifford system (m=" << sys.m << ", k=" << sys.k << ", l=" << sys.l
            << ") on R^" << sys.ambient_dim() << "\n"
            << "  m_plus =  " << sys.m_plus() << "\n"
            << "  m_minus = " << sys.m_minus() << "\n"
            << "  realization: " << sys.realization << "\n"
            << human_row(report) << "\n";
  if (!dump_path.empty()) {
    std::ofstream out(dump_path);
    require(out.good(), "invalid-argument", "cannot write " + dump_path);
    out << to_json(sys).dump(2) << '\n';
    std::cout << "  wrote " << dump_path << "\n";
  }
  return report.pass ? kExitPass : kExitVerificationFailure;
}

int run_verify(const RunConfig& cfg) {
  const auto result = run_campaign(cfg);
  const auto files = write_reports(result, cfg);
  for (const auto& suite : result.suites) std::cout << suite_to_human(suite) << '\n';
  std::cout << "reports written to " << cfg.out_dir << " (" << files.size()
            << " files)\n";
  if (!cfg.dump_samples.empty()) {
    std::ofstream out(cfg.dump_samples);
    require(out.good(), "invalid-argument", "cannot write " + cfg.dump_samples);
    for (auto [m, k] : cfg.configurations)
      dump_samples_csv(FkmGeometry(build_clifford_system(m, k)), cfg, out);
    std::cout << "sample dump written to " << cfg.dump_samples << '\n';
  }
  if (!result.all_pass) {
    std::cout << "FAILED checks:\n";
    for (const auto& id : result.failed_ids) std::cout << "  " << id << '\n';
    return kExitVerificationFailure;
  }
  std::cout << "all checks passed\n";
  return kExitPass;
}

int run_critical(int m, int k, const std::string& function, int draws,
                 std::uint64_t seed, const std::string& out_dir) {
  const FkmGeometry geom(build_clifford_system(m, k));
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path csv_path = fs::path(out_dir) / ("critical_" + geom.config().name() +
                                                 "_" + function + ".csv");
  std::ofstream csv(csv_path);
  require(csv.good(), "invalid-argument", "cannot write " + csv_path.string());
  csv << "function,draw,point,morse_index,degenerate,gradient_norm";
  for (int i = 0; i < geom.ambient_dim(); ++i) csv << ",x" << i;
  csv << ",hessian_diagonal\n";
  csv.precision(17);

  const int expected = function == "omega2" ? 4 : 8;
  bool counts_ok = true, nondegenerate = true;
  for (int draw = 0; draw < draws; ++draw) {
    std::vector<Vector> pts;
    std::vector<CriticalPoint> classified;
    if (function == "omega2") {
      const Vector q2 = draw_generic_q2(geom, seed, draw);
      pts = critical_points_omega2(geom, q2);
      for (const auto& x : pts) classified.push_back(classify_omega2(geom, x, q2));
    } else if (function == "phi1" || function == "phi3") {
      const Vector q1 = draw_generic_q1(geom, seed, draw);
      pts = critical_points_normal_geodesic(geom, q1);
      const auto id = function == "phi1" ? Eigenfunction::Phi1 : Eigenfunction::Phi3;
      for (const auto& x : pts) classified.push_back(classify(geom, x, id, q1));
    } else {
      fail("invalid-argument", "--function must be phi1, phi3 or omega2");
    }
    counts_ok = counts_ok && static_cast<int>(pts.size()) == expected;
    for (std::size_t i = 0; i < classified.size(); ++i) {
      const auto& c = classified[i];
      nondegenerate = nondegenerate && !c.degenerate;
      csv << function << ',' << draw << ',' << i << ',' << c.morse_index << ','
          << (c.degenerate ? 1 : 0) << ',' << c.gradient_norm;
      for (int j = 0; j < c.x.size(); ++j) csv << ',' << c.x[j];
      csv << ",\"";
      for (int j = 0; j < c.hessian_diagonal.size(); ++j)
        csv << (j ? ";" : "") << c.hessian_diagonal[j];
      csv << "\"\n";
    }
  }
  std::cout << "critical-point dump written to " << csv_path << '\n'
            << "  expected " << expected << " points per draw over " << draws
            << " draws: " << (counts_ok ? "ok" : "COUNT MISMATCH") << '\n'
            << "  nondegenerate: " << (nondegenerate ? "yes" : "NO") << '\n';
  return counts_ok && nondegenerate ? kExitPass : kExitVerificationFailure;
}

int run_scan(int m, int k, const std::string& function, int levels, std::uint64_t seed,
             const std::string& out_dir) {
  const FkmGeometry geom(build_clifford_system(m, k));
  require(function == "phi2" || function == "omega1", "invalid-argument",
          "--function must be phi2 or omega1");
  rng::Stream sigma_stream(seed, "sigma." + geom.config().name());
  const auto p = sphere_element(geom.system, sigma_stream.unit_vector(m + 1));
  const auto spec = function == "phi2" ? make_phi2(geom, p) : make_omega1(geom, p);
  const auto field = ambient_field(geom, spec);
  const double tmax = function == "phi2" ? geom.phi2_critical_value() : 1.0;

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path path =
      fs::path(out_dir) / ("scan_" + geom.config().name() + "_" + function + ".csv");
  std::ofstream out(path);
  require(out.good(), "invalid-argument", "cannot write " + path.string());
  out << "level,h_numeric,h_closed_form,abs_diff\n";
  out.precision(17);

  double worst = 0.0;
  for (int i = 0; i < levels; ++i) {
    const double level = -0.9 * tmax + 1.8 * tmax * i / std::max(1, levels - 1);
    const Vector start = function == "phi2" ? sample_Mn(geom, seed + 1, i)
                                            : sample_Mminus(geom, seed + 1, i);
    const Vector x = move_to_field_level(geom, field, start, level);
    const auto frame =
        tangent_frame(geom, x, function == "phi2" ? Variety::Mn : Variety::Mminus);
    const double numeric = level_mean_curvature(geom, field, frame);
    const double closed = function == "phi2"
                              ? mean_curvature_closed_form_phi2(geom, level)
                              : mean_curvature_closed_form_omega1(geom, level);
    out << level << ',' << numeric << ',' << closed << ',' << std::abs(numeric - closed)
        << '\n';
    worst = std::max(worst, std::abs(numeric - closed));
  }
  std::cout << "mean-curvature profile written to " << path << '\n'
            << "  max |numeric - closed form| = " << worst << '\n';
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical verification laboratory for FKM isoparametric hypersurfaces"};
  app.require_subcommand(1);

  // build
  auto* build = app.add_subcommand("build", "construct and validate a Clifford system");
  int b_m = 1, b_k = 3;
  std::string b_dump;
  build->add_option("--m", b_m, "number of generators minus one")->required();
  build->add_option("--k", b_k, "multiplicity")->required();
  build->add_option("--dump-system", b_dump, "write the system as JSON");

  // verify
  auto* verify = app.add_subcommand("verify", "run the full verification campaign");
  std::vector<int> v_ms, v_ks;
  std::vector<std::string> v_tols;
  std::string v_config_file;
  RunConfig cfg;
  verify->add_option("--m", v_ms, "configuration m (repeatable, pairs with --k)");
  verify->add_option("--k", v_ks, "configuration k (repeatable, pairs with --m)");
  verify->add_option("--seed", cfg.seed, "64-bit campaign seed");
  verify->add_option("--samples", cfg.samples, "samples per check");
  verify->add_option("--draws", cfg.draws, "generic parameter draws for counts");
  verify->add_option("--tol", v_tols, "tolerance override CHECK=VALUE (repeatable)");
  verify->add_option("--out", cfg.out_dir, "report output directory");
  verify->add_option("--format", cfg.format, "report format: json|csv|human");
  verify->add_option("--dump-samples", cfg.dump_samples, "CSV dump of sampled points");
  verify->add_option("--config", v_config_file, "key-value config file (flags override)");

  // critical
  auto* critical = app.add_subcommand("critical", "enumerate and classify critical points");
  int c_m = 1, c_k = 3, c_draws = 20;
  std::uint64_t c_seed = 20250809;
  std::string c_function = "phi1", c_out = "reports";
  critical->add_option("--m", c_m)->required();
  critical->add_option("--k", c_k)->required();
  critical->add_option("--function", c_function, "phi1|phi3|omega2")->required();
  critical->add_option("--draws", c_draws, "generic parameter draws");
  critical->add_option("--seed", c_seed, "seed");
  critical->add_option("--out", c_out, "output directory");

  // scan
  auto* scan = app.add_subcommand("scan", "mean-curvature profile of the level sets");
  int s_m = 2, s_k = 2, s_levels = 50;
  std::uint64_t s_seed = 20250809;
  std::string s_function = "phi2", s_out = "reports";
  scan->add_option("--function", s_function, "phi2|omega1")->required();
  scan->add_option("--m", s_m)->required();
  scan->add_option("--k", s_k)->required();
  scan->add_option("--levels", s_levels, "number of levels");
  scan->add_option("--seed", s_seed, "seed");
  scan->add_option("--out", s_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) return run_build(b_m, b_k, b_dump);
    if (verify->parsed()) {
      RunConfig effective = cfg;
      if (!v_config_file.empty()) {
        effective = parse_config_file(v_config_file);
        // explicit flags take precedence over the file
        for (const auto* opt : verify->get_options()) {
          if (opt->count() == 0) continue;
          const auto name = opt->get_name();
          if (name == "--seed") effective.seed = cfg.seed;
          else if (name == "--samples") effective.samples = cfg.samples;
          else if (name == "--draws") effective.draws = cfg.draws;
          else if (name == "--out") effective.out_dir = cfg.out_dir;
          else if (name == "--format") effective.format = cfg.format;
          else if (name == "--dump-samples") effective.dump_samples = cfg.dump_samples;
        }
      }
      if (!v_ms.empty() || !v_ks.empty())
        effective.configurations = zip_configs(v_ms, v_ks);
      apply_tol_overrides(effective, v_tols);
      apply_environment(effective);
      return run_verify(effective);
    }
    if (critical->parsed())
      return run_critical(c_m, c_k, c_function, c_draws, c_seed, c_out);
    if (scan->parsed()) return run_scan(s_m, s_k, s_function, s_levels, s_seed, s_out);
  } catch (const fkmlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  return kExitInvalidConfig;
}
