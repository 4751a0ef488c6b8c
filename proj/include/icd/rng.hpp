#ifndef ICD_RNG_HPP
#define ICD_RNG_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>

namespace icd {

/// Platform-stable random source. std::mt19937_64 output is fully specified by
/// the standard; the distributions below are written out so results do not
/// depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller.
  double normal();

  Eigen::VectorXd normal_vector(Eigen::Index dim);

  /// Uniform point on the unit sphere.
  Eigen::VectorXd unit_vector(Eigen::Index dim);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stable 64-bit mix of a seed and a label (FNV-1a followed by splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace icd

#endif  // ICD_RNG_HPP
