#pragma once

#include <cstdint>

namespace comove {

// Counter-based generator: draw n of stream s under seed k is a pure function
// of (k, s, n), so streams are reproducible on every platform and a sequence
// can be replayed from any position.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static std::uint64_t mix(std::uint64_t z);
  // Stateless access to draw `counter` of this stream.
  std::uint64_t at(std::uint64_t counter) const;

  std::uint64_t next_u64();
  // Uniform on (0, 1), 53-bit resolution; never returns 0 or 1.
  double uniform();
  // Standard normal (Box-Muller, both variates used).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  // Student t with `dof` degrees of freedom (integer dof).
  double student_t(int dof);
  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  Rng fork(std::uint64_t stream) const;
  std::uint64_t position() const { return counter_; }
  void seek(std::uint64_t counter);

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0;
};

}  // namespace comove
