#pragma once

// Spectral distances between unitary orbits of positive matrices.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "orbitdist/errors.hpp"
#include "orbitdist/linalg.hpp"
#include "orbitdist/matching.hpp"
#include "orbitdist/measures.hpp"

namespace orbitdist {

struct DistanceReport {
  double delta = 0.0;
  double d_w = 0.0;
  std::optional<double> d_p;  // empty when the spectral measures have different mass
  std::optional<double> d_u_upper;
  double d_u_lower = 0.0;
  std::optional<Unitary> witness;

  bool mass_mismatch() const { return !d_p.has_value(); }
};

inline void require_same_dim(const Hermitian& a, const Hermitian& b) {
  if (a.dim() != b.dim())
    throw DimensionMismatch("dimensions " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
}

// max_i |alpha_i - beta_i| over two ascending lists of equal length.
inline double sorted_bottleneck(std::span<const double> alpha, std::span<const double> beta) {
  if (alpha.size() != beta.size()) throw LengthMismatch("spectra of different lengths");
  double m = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) m = std::max(m, std::abs(alpha[i] - beta[i]));
  return m;
}

struct UnitaryDistance {
  double value;
  Unitary witness;  // ||u a u* - b|| == value
};

// Weyl: for Hermitian a, b the unitary-orbit distance is the largest gap
// between the eigenvalue lists in ascending order, attained by
// u = V_b V_a* for the ascending eigenvector matrices.
inline UnitaryDistance d_u_hermitian(const Hermitian& a, const Hermitian& b) {
  require_same_dim(a, b);
  const Spectrum sa = eigh(a), sb = eigh(b);
  return {sorted_bottleneck(sa.values, sb.values), Unitary(unchecked, sb.vectors * sa.vectors.adjoint())};
}

// Cuntz distance between positive matrices. For matrices e_{t+r}(a) <~ e_t(b)
// is the rank inequality counting(a, t + r) <= counting(b, t), and the
// infimum over admissible r is the ascending-eigenvalue bottleneck.
inline double d_w_matrix(const Hermitian& a, const Hermitian& b) {
  require_same_dim(a, b);
  const auto alpha = positive_eigh(a).values;
  const auto beta = positive_eigh(b).values;
  return sorted_bottleneck(alpha, beta);
}

inline constexpr double kScanOffset = 1e-7;

// Direct evaluation of the rank-comparison definition: the smallest
// candidate r for which counting(a, t + r) <= counting(b, t) and the mirror
// inequality hold at every probe t > 0. Probes sit at eigenvalues, at
// eigenvalues shifted by -r, and kScanOffset either side of each.
inline double d_w_matrix_scan(const Hermitian& a, const Hermitian& b) {
  require_same_dim(a, b);
  const auto alpha = positive_eigh(a).values;
  const auto beta = positive_eigh(b).values;
  std::vector<double> candidates{0.0};
  for (double x : alpha) {
    candidates.push_back(x);
    for (double y : beta) candidates.push_back(std::abs(x - y));
  }
  for (double y : beta) candidates.push_back(y);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  auto admissible = [&](double r) {
    std::vector<double> probes{kScanOffset};
    for (std::span<const double> vals : {std::span<const double>(alpha), std::span<const double>(beta)})
      for (double lam : vals)
        for (double base : {lam, lam - r})
          for (double off : {-kScanOffset, 0.0, kScanOffset}) probes.push_back(base + off);
    for (double t : probes) {
      if (t <= 0.0) continue;
      if (counting(alpha, t + r) > counting(beta, t)) return false;
      if (counting(beta, t + r) > counting(alpha, t)) return false;
    }
    return true;
  };
  for (double c : candidates)
    if (admissible(c + 2.0 * kScanOffset)) return c;
  return candidates.back();
}

// Levy-Prokhorov distance of the spectral measures under the matrix trace.
// Throws MassMismatch when the ranks differ.
inline double d_p_matrix(const Hermitian& a, const Hermitian& b) {
  require_same_dim(a, b);
  return lp_distance(measure_from_spectrum(a), measure_from_spectrum(b));
}

inline DistanceReport distance_report(const Hermitian& a, const Hermitian& b) {
  require_same_dim(a, b);
  DistanceReport r;
  const auto alpha = positive_eigh(a).values;
  const auto beta = positive_eigh(b).values;
  r.delta = delta_matching(alpha, beta);
  r.d_w = sorted_bottleneck(alpha, beta);
  try {
    r.d_p = lp_distance(measure_from_eigenvalues(alpha), measure_from_eigenvalues(beta));
  } catch (const MassMismatch&) {
    r.d_p.reset();
  }
  auto du = d_u_hermitian(a, b);
  r.d_u_upper = du.value;
  r.d_u_lower = r.d_w;
  r.witness = std::move(du.witness);
  return r;
}

// Report for (a1 + a2, b1 + b2) in the direct sum. Unitaries of a direct sum
// act blockwise and Cuntz comparison is componentwise, so each distance is
// the larger component value; traces of the sum are combinations of the
// component traces, so d_p follows the same rule.
inline DistanceReport direct_sum(const DistanceReport& first, const DistanceReport& second) {
  DistanceReport r;
  r.delta = std::max(first.delta, second.delta);
  r.d_w = std::max(first.d_w, second.d_w);
  r.d_u_lower = std::max(first.d_u_lower, second.d_u_lower);
  if (first.d_p && second.d_p) r.d_p = std::max(*first.d_p, *second.d_p);
  if (first.d_u_upper && second.d_u_upper) r.d_u_upper = std::max(*first.d_u_upper, *second.d_u_upper);
  if (first.witness && second.witness) {
    const std::array<Matrix, 2> blocks{first.witness->matrix(), second.witness->matrix()};
    r.witness = Unitary(unchecked, block_diagonal(blocks));
  }
  return r;
}

}  // namespace orbitdist
