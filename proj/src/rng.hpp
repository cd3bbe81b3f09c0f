#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace shmvdr {

// Deterministic stream RNG (xoshiro256++ seeded via splitmix64). Every noise
// component draws from its own named stream so results do not depend on
// thread scheduling or evaluation order.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(uint64_t seed) { reseed(seed); }
  Rng(uint64_t seed, std::string_view stream) { reseed(derive_stream(seed, stream)); }

  void reseed(uint64_t seed);

  uint64_t next_u64();

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller (fully specified, platform independent)
  double next_gaussian();

  static uint64_t derive_stream(uint64_t seed, std::string_view stream);

 private:
  uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shmvdr
