#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace roughhedge {

// Philox4x32-10 block cipher (Salmon et al., "Parallel random numbers: as easy
// as 1, 2, 3"). Maps a 128-bit counter and a 64-bit key to 128 random bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

// SplitMix64 finalizer, used to fold (seed, tag, index...) tuples into keys.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

// A random stream identified by (key, stream). Paths use their index as the
// stream id, so a path's draws never depend on which thread produced it or on
// how many paths were generated before it.
class StreamRng {
 public:
  StreamRng(std::uint64_t key, std::uint64_t stream);

  std::uint32_t next_u32();
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  // Standard normal via Box-Muller.
  double normal();
  void fill_normal(std::span<double> out);

  // UniformRandomBitGenerator interface.
  using result_type = std::uint32_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xffffffffu; }
  result_type operator()() { return next_u32(); }

 private:
  void refill();

  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxCounter buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace roughhedge
