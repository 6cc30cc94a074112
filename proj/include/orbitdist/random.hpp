#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "orbitdist/linalg.hpp"

namespace orbitdist {

// Seeded source of the library's random instances. Draws go through the raw
// 64-bit engine output so results are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller; u1 in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  complex complex_normal() { return {normal(), normal()}; }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Matrix random_gaussian(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.complex_normal();
  return m;
}

inline Hermitian random_hermitian(Rng& rng, std::size_t dim) {
  const Matrix g = random_gaussian(rng, dim, dim);
  return Hermitian(unchecked, 0.5 * (g + g.adjoint()));
}

inline Unitary random_unitary(Rng& rng, std::size_t dim) {
  return nearest_unitary(random_gaussian(rng, dim, dim));
}

// W diag(values) W* for a random unitary W.
inline Hermitian random_with_spectrum(Rng& rng, std::span<const double> values) {
  const Unitary w = random_unitary(rng, values.size());
  return w.conjugate(Hermitian::diagonal(values));
}

// Positive contraction with eigenvalues drawn uniformly from [lo, hi].
inline Hermitian random_positive_contraction(Rng& rng, std::size_t dim, double lo = 0.0, double hi = 1.0) {
  std::vector<double> vals(dim);
  for (auto& v : vals) v = rng.uniform(lo, hi);
  return random_with_spectrum(rng, vals);
}

}  // namespace orbitdist
