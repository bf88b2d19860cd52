#include "comove/rng.hpp"

#include <cmath>
#include <numbers>

namespace comove {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamMul = 0xD1B54A32D192ED03ULL;

}  // namespace

std::uint64_t Rng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), key_(mix(mix(seed + kGolden) ^ (stream * kStreamMul + 1))) {}

std::uint64_t Rng::at(std::uint64_t counter) const { return mix(key_ + (counter + 1) * kGolden); }

std::uint64_t Rng::next_u64() { return at(counter_++); }

double Rng::uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform(), u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

double Rng::student_t(int dof) {
  const double z = normal();
  double chi2 = 0;
  for (int i = 0; i < dof; ++i) {
    const double g = normal();
    chi2 += g * g;
  }
  return z / std::sqrt(chi2 / dof);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection keeps the result unbiased.
  const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
  std::uint64_t x;
  do x = next_u64();
  while (x >= limit);
  return x % n;
}

Rng Rng::fork(std::uint64_t stream) const { return Rng(seed_ ^ mix(key_ + stream), stream); }

void Rng::seek(std::uint64_t counter) {
  counter_ = counter;
  have_spare_ = false;
}

}  // namespace comove
