#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace fkmlab::rng {

// All sampling in the library flows through Stream so that a report is
// reproducible from (seed, label, index) alone.  splitmix64 plus FNV-1a
// label hashing keeps the byte stream identical across platforms and
// standard libraries; std::normal_distribution would not.

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    state_ = seed;
    std::uint64_t a = splitmix64(state_);
    state_ ^= fnv1a(label);
    std::uint64_t b = splitmix64(state_);
    state_ = a ^ (b + 0x9e3779b97f4a7c15ull * (index + 1));
    (void)splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in (0,1]; never returns 0 so log() below is safe
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Box-Muller, two uniforms per draw, no cached spare
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd gaussian_vector(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gaussian();
    return v;
  }

  Eigen::VectorXd unit_vector(int dim) {
    Eigen::VectorXd v = gaussian_vector(dim);
    double norm = v.norm();
    while (norm < 1e-12) {  // astronomically unlikely; redraw keeps the contract total
      v = gaussian_vector(dim);
      norm = v.norm();
    }
    return v / norm;
  }

 private:
  std::uint64_t state_;
};

}  // namespace fkmlab::rng
