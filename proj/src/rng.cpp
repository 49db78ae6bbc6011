#include "stgf/rng.hpp"

namespace stgf {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t window, std::uint64_t horizon) {
  return splitmix64(splitmix64(base + 0x100000001b3ULL * window) + horizon);
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// Odd minimax-style polynomial for sin on [-pi/2, pi/2], evaluated with fma.
double sin_kernel(double r) {
  const double r2 = r * r;
  double p = 1.5896230157654656e-10;
  p = std::fma(p, r2, -2.5050747762857807e-08);
  p = std::fma(p, r2, 2.7557313621385722e-06);
  p = std::fma(p, r2, -1.9841269829921969e-04);
  p = std::fma(p, r2, 8.3333333333224922e-03);
  p = std::fma(p, r2, -1.6666666666666630e-01);
  return std::fma(p * r2, r, r);
}

}  // namespace

double portable_sin(double x) {
  // k = nearest integer to x/pi, via floor (exact, no rounding-mode dependence)
  const double k = std::floor(x / kPi + 0.5);
  const double r = std::fma(-k, kPi, x);
  const double s = sin_kernel(r);
  const bool flip = std::fmod(k, 2.0) != 0.0;
  return flip ? -s : s;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  // rejection sampling; unbiased and engine-portable
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
  std::uint64_t v = engine_();
  while (v >= limit) v = engine_();
  return v % n;
}

void Rng::shuffle_indices(std::span<std::size_t> idx) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_index(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace stgf
