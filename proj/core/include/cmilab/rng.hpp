#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace cmilab {

std::uint64_t splitmix64(std::uint64_t x);

/// Seeded random stream. Every stream is identified by a 64-bit key derived
/// from a master seed and a path of substream indices, so the numbers drawn by
/// trial k never depend on which thread runs it or in which order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  Rng substream(std::uint64_t index) const;
  Rng substream(std::string_view name) const;

  std::uint64_t key() const { return key_; }

  double uniform();
  double normal();
  /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
  std::complex<double> complex_normal();
  std::uint64_t below(std::uint64_t bound);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace cmilab
