#include "cmilab/rng.hpp"

#include <cmath>

namespace cmilab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : key_(splitmix64(seed)), engine_(key_) {}

Rng Rng::substream(std::uint64_t index) const {
  Rng child(0);
  child.key_ = splitmix64(key_ ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  child.engine_.seed(child.key_);
  return child;
}

Rng Rng::substream(std::string_view name) const {
  // FNV-1a over the name, then mixed like a numeric index.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return substream(h);
}

double Rng::uniform() { return uniform_(engine_); }

double Rng::normal() { return normal_(engine_); }

std::complex<double> Rng::complex_normal() {
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

std::uint64_t Rng::below(std::uint64_t bound) {
  std::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
  return dist(engine_);
}

}  // namespace cmilab

