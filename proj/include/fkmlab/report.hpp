#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fkmlab {

struct ConfigId {
  int m = 0;
  int k = 0;
  int l = 0;

  std::string name() const {
    return "m" + std::to_string(m) + "k" + std::to_string(k);
  }
};

// log10 residual histogram: bucket 0 collects r < 1e-16, bucket i covers
// [1e-(17-i), 1e-(16-i)), the last bucket collects r >= 1e-2.
constexpr int kHistogramBuckets = 16;

struct ResidualStats {
  double max = 0.0;
  double sum = 0.0;
  std::int64_t count = 0;
  std::array<std::int64_t, kHistogramBuckets> histogram{};

  void add(double r) {
    r = std::abs(r);
    max = std::max(max, r);
    sum += r;
    ++count;
    int bucket = 0;
    if (r >= 1e-16) {
      bucket = 1 + static_cast<int>(std::floor(std::log10(r) + 16.0));
      bucket = std::clamp(bucket, 1, kHistogramBuckets - 1);
    }
    ++histogram[bucket];
  }

  double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
};

struct VerificationReport {
  std::string identity_id;
  ConfigId config;
  std::uint64_t seed = 0;
  std::int64_t samples = 0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::array<std::int64_t, kHistogramBuckets> histogram{};
  nlohmann::ordered_json details = nlohmann::ordered_json::object();

  static VerificationReport from_stats(std::string id, ConfigId cfg, std::uint64_t seed,
                                       const ResidualStats& stats, double tol) {
    VerificationReport r;
    r.identity_id = std::move(id);
    r.config = cfg;
    r.seed = seed;
    r.samples = stats.count;
    r.max_residual = stats.max;
    r.mean_residual = stats.mean();
    r.tol = tol;
    r.pass = stats.max < tol;
    r.histogram = stats.histogram;
    return r;
  }
};

inline nlohmann::ordered_json to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["identity_id"] = r.identity_id;
  j["config"] = {{"m", r.config.m}, {"k", r.config.k}, {"l", r.config.l}};
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  j["max_residual"] = r.max_residual;
  j["mean_residual"] = r.mean_residual;
  j["tol"] = r.tol;
  j["pass"] = r.pass;
  j["residual_histogram"] = r.histogram;
  if (!r.details.empty()) j["details"] = r.details;
  return j;
}

inline std::string csv_header() {
  return "identity_id,m,k,l,seed,samples,max_residual,mean_residual,tol,pass";
}

inline std::string to_csv_row(const VerificationReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.identity_id << ',' << r.config.m << ',' << r.config.k << ',' << r.config.l
     << ',' << r.seed << ',' << r.samples << ',' << r.max_residual << ','
     << r.mean_residual << ',' << r.tol << ',' << (r.pass ? "pass" : "FAIL");
  return os.str();
}

inline std::string human_row(const VerificationReport& r) {
  std::ostringstream os;
  os.precision(3);
  os << (r.pass ? "  ok   " : "  FAIL ");
  os.width(34);
  os << std::left << r.identity_id;
  os << std::scientific << "  max " << r.max_residual << "  tol " << r.tol
     << "  (" << r.samples << " samples)";
  return os.str();
}

}  // namespace fkmlab
