#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace stgf {

// Mixing function used to derive independent sub-stream seeds (grid cells,
// per-seed experiment repeats) from a base seed.
std::uint64_t splitmix64(std::uint64_t x);

// Seed for one (window, horizon) grid cell.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t window, std::uint64_t horizon);

// Sine approximation built from exact IEEE-754 arithmetic (fma chains after
// an exact floor-based range reduction). libm sin() is not bit-identical
// across platforms; this one is, which keeps synthetic fixtures portable.
// Absolute error is below 1e-9 on the reduced range.
double portable_sin(double x);

// Deterministic random stream. std::mt19937_64 has a fully specified output
// sequence, but the standard distributions do not, so the uniform/normal
// transforms are spelled out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  // uniform integer in [0, n); n >= 1
  std::uint64_t uniform_index(std::uint64_t n);

  // Approximately standard normal: Irwin-Hall sum of 12 uniforms minus 6.
  // Chosen over Box-Muller because it needs no libm calls.
  double normalish() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform01();
    return s - 6.0;
  }

  void shuffle_indices(std::span<std::size_t> idx);

 private:
  std::mt19937_64 engine_;
};

}  // namespace stgf
