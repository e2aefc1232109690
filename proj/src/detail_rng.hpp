#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lcv::detail {

// Deterministic draws layered over mt19937_64 (whose output sequence is
// pinned by the standard). Distribution shaping is done by hand because the
// std distribution adaptors are implementation-defined and would break the
// "same seed, same instance" guarantee.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  std::uint64_t below(std::uint64_t n) { return eng_() % n; }

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }  // [0, 1)

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace lcv::detail
