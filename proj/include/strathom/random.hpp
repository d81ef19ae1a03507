#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace strathom {

using Rng = std::mt19937_64;

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Sub-seed for a named task, so independent tasks never share a stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view task) {
  return splitmix64(seed ^ splitmix64(fnv1a64(task)));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x51ed270b27a1f2c3ULL));
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Eigen::VectorXd unit_vector(Rng& rng, Eigen::Index n) {
  for (;;) {
    Eigen::VectorXd v = gaussian_vector(rng, n);
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

/// Uniform sample from the unit ball of dimension n.
inline Eigen::VectorXd ball_vector(Rng& rng, Eigen::Index n) {
  if (n == 0) return Eigen::VectorXd(0);
  const double r = std::pow(uniform(rng, 0.0, 1.0), 1.0 / static_cast<double>(n));
  return r * unit_vector(rng, n);
}

}  // namespace strathom
