#pragma once

// Reference computations used by the tests. None of them calls into the
// algorithms they check: eigenvalues come from inertia counting, exponentials
// from Taylor series, matchings and transport from brute force.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <vector>

#include "orbitdist/matrix.hpp"

namespace oracle {

using orbitdist::complex;
using orbitdist::Matrix;

// Number of eigenvalues of the Hermitian h strictly below sigma, by
// Sylvester's law of inertia on the LDL* factorization of h - sigma.
inline std::size_t eigenvalues_below(const Matrix& h, double sigma) {
  const std::size_t n = h.rows();
  Matrix a = h;
  for (std::size_t i = 0; i < n; ++i) a(i, i) -= sigma;
  std::size_t negative = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double pivot = a(k, k).real();
    if (pivot == 0.0) pivot = -1e-300;
    if (pivot < 0.0) ++negative;
    for (std::size_t i = k + 1; i < n; ++i) {
      const complex f = a(i, k) / pivot;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * std::conj(a(j, k));
    }
  }
  return negative;
}

// Ascending eigenvalues by bisection on the inertia count.
inline std::vector<double> eigenvalues(const Matrix& h) {
  const std::size_t n = h.rows();
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(h(i, j));
    bound = std::max(bound, row);
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lo = -bound - 1.0, hi = bound + 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      const double mid = 0.5 * (lo + hi);
      (eigenvalues_below(h, mid) > i ? hi : lo) = mid;
    }
    out[i] = 0.5 * (lo + hi);
  }
  return out;
}

inline double frobenius(const Matrix& m) { return m.frobenius(); }

// Largest singular value, from the eigenvalues of m* m.
inline double spectral_norm(const Matrix& m) {
  const Matrix g = m.adjoint() * m;
  const auto ev = eigenvalues(g);
  return std::sqrt(std::max(0.0, ev.back()));
}

// exp(m) by scaling and squaring with a Taylor series.
inline Matrix expm(const Matrix& m) {
  const double norm = m.frobenius();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.25) {
    scale *= 0.5;
    ++squarings;
  }
  const Matrix x = scale * m;
  Matrix term = Matrix::identity(m.rows()), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = (1.0 / k) * (term * x);
    sum = sum + term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

inline Matrix exp_i(const Matrix& h) { return expm(complex(0.0, 1.0) * h); }

// min over permutations sigma of max_i |alpha_i - beta_sigma(i)|.
inline double matching_by_permutations(const std::vector<complex>& alpha, const std::vector<complex>& beta) {
  std::vector<std::size_t> p(beta.size());
  std::iota(p.begin(), p.end(), 0);
  double best = INFINITY;
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(alpha[i] - beta[p[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

// inf{r : counting(a, t + r) <= counting(b, t) and the mirror, for all t > 0},
// scanning candidate r and probe points t built from the eigenvalues.
inline double cuntz_scan(std::vector<double> alpha, std::vector<double> beta) {
  for (auto* v : {&alpha, &beta})
    for (double& x : *v) x = std::max(0.0, x);
  auto count = [](const std::vector<double>& v, double t) {
    return std::count_if(v.begin(), v.end(), [t](double x) { return x > t; });
  };
  std::vector<double> cands{0.0};
  for (double x : alpha)
    for (double y : beta) cands.push_back(std::abs(x - y));
  for (double x : alpha) cands.push_back(x);
  for (double y : beta) cands.push_back(y);
  std::sort(cands.begin(), cands.end());
  const double h = 1e-7;
  for (double c : cands) {
    const double r = c + 2 * h;
    bool ok = true;
    std::vector<double> probes{h};
    for (double x : alpha)
      for (double s : {x, x - r}) probes.insert(probes.end(), {s - h, s, s + h});
    for (double y : beta)
      for (double s : {y, y - r}) probes.insert(probes.end(), {s - h, s, s + h});
    for (double t : probes) {
      if (t <= 0.0) continue;
      if (count(alpha, t + r) > count(beta, t) || count(beta, t + r) > count(alpha, t)) ok = false;
    }
    if (ok) return c;
  }
  return cands.back();
}

// The same scan in a direct sum: the rank conditions must hold in every
// summand, each summand given by its pair of eigenvalue lists.
inline double cuntz_scan_blocks(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& blocks) {
  std::vector<double> cands{0.0};
  for (const auto& [alpha, beta] : blocks) {
    for (double x : alpha)
      for (double y : beta) cands.push_back(std::abs(x - y));
    cands.insert(cands.end(), alpha.begin(), alpha.end());
    cands.insert(cands.end(), beta.begin(), beta.end());
  }
  std::sort(cands.begin(), cands.end());
  for (double c : cands) {
    bool ok = true;
    for (const auto& [alpha, beta] : blocks) ok = ok && cuntz_scan(alpha, beta) <= c;
    if (ok) return c;
  }
  return cands.back();
}

struct Atom {
  double x, w;
};

// mu(U_r) >= nu(U) for all open U, checked on every union of r-balls around
// atoms of nu (the only sets that matter for atomic measures).
inline bool lp_one_sided(const std::vector<Atom>& mu, const std::vector<Atom>& nu, double r, double slack = 1e-9) {
  const std::size_t m = nu.size();
  for (std::uint64_t s = 1; s < (std::uint64_t{1} << m); ++s) {
    double need = 0.0, have = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (s >> i & 1) need += nu[i].w;
    for (const Atom& a : mu) {
      bool inside = false;
      for (std::size_t i = 0; i < m; ++i)
        if ((s >> i & 1) && (std::abs(a.x - nu[i].x) < r - 1e-12 || a.x == nu[i].x)) inside = true;
      if (inside) have += a.w;
    }
    if (have < need - slack) return false;
  }
  return true;
}

// Smallest candidate distance c such that both one-sided conditions hold for
// every r slightly above c.
inline double lp_distance(const std::vector<Atom>& mu, const std::vector<Atom>& nu) {
  std::vector<double> cands{0.0};
  for (const Atom& a : mu)
    for (const Atom& b : nu) cands.push_back(std::abs(a.x - b.x));
  for (const Atom& a : mu) cands.push_back(a.x);
  for (const Atom& b : nu) cands.push_back(b.x);
  std::sort(cands.begin(), cands.end());
  for (double c : cands)
    if (lp_one_sided(mu, nu, c + 1e-9) && lp_one_sided(nu, mu, c + 1e-9)) return c;
  return cands.back();
}

}  // namespace oracle
