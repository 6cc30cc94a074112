#pragma once

// Dense Hermitian linear algebra: a cyclic Jacobi eigensolver and the
// functional calculus built on top of it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "orbitdist/errors.hpp"
#include "orbitdist/matrix.hpp"

namespace orbitdist {

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr double kNegativeClamp = 1e-10;
inline constexpr double kNegativeError = 1e-8;
inline constexpr double kRankThreshold = 1e-9;

struct unchecked_t {
  explicit unchecked_t() = default;
};
inline constexpr unchecked_t unchecked{};

// Square matrix equal to its adjoint. Construction checks the invariant
// entrywise and then symmetrizes exactly.
class Hermitian {
 public:
  Hermitian() = default;
  explicit Hermitian(Matrix m, double tolerance = kHermitianTolerance) : m_(std::move(m)) {
    if (!m_.square() || m_.rows() == 0) throw NonHermitianInput("matrix must be square with dim >= 1");
    for (std::size_t i = 0; i < m_.rows(); ++i)
      for (std::size_t j = i; j < m_.cols(); ++j)
        if (std::abs(m_(i, j) - std::conj(m_(j, i))) > tolerance)
          throw NonHermitianInput("entry (" + std::to_string(i) + "," + std::to_string(j) + ") breaks symmetry");
    symmetrize();
  }
  // For values Hermitian by construction up to rounding.
  Hermitian(unchecked_t, Matrix m) : m_(std::move(m)) { symmetrize(); }

  static Hermitian zero(std::size_t dim) { return Hermitian(unchecked, Matrix(dim)); }
  static Hermitian identity(std::size_t dim) { return Hermitian(unchecked, Matrix::identity(dim)); }
  static Hermitian diagonal(std::span<const double> values) {
    return Hermitian(unchecked, Matrix::diagonal(values));
  }

  const Matrix& matrix() const { return m_; }
  std::size_t dim() const { return m_.rows(); }
  const complex& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  friend Hermitian operator+(const Hermitian& a, const Hermitian& b) { return {unchecked, a.m_ + b.m_}; }
  friend Hermitian operator-(const Hermitian& a, const Hermitian& b) { return {unchecked, a.m_ - b.m_}; }
  friend Hermitian operator*(double s, const Hermitian& a) { return {unchecked, s * a.m_}; }
  friend bool operator==(const Hermitian&, const Hermitian&) = default;

 private:
  void symmetrize() {
    for (std::size_t i = 0; i < m_.rows(); ++i) {
      m_(i, i) = m_(i, i).real();
      for (std::size_t j = i + 1; j < m_.cols(); ++j) {
        const complex avg = 0.5 * (m_(i, j) + std::conj(m_(j, i)));
        m_(i, j) = avg;
        m_(j, i) = std::conj(avg);
      }
    }
  }

  Matrix m_;
};

class Unitary;

struct Spectrum {
  std::vector<double> values;  // ascending
  Matrix vectors;              // columns are the matching orthonormal eigenvectors
};

namespace detail {

// Cyclic-by-row complex Jacobi. Each rotation first gauges a_pq real with a
// diagonal phase, then applies the classical real rotation.
inline void jacobi_sweeps(Matrix& a, Matrix& v) {
  const std::size_t n = a.rows();
  const double fro = a.frobenius();
  if (fro == 0.0) return;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) off += std::norm(a(i, j));
    if (std::sqrt(off) < 1e-13 * fro) return;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double g = std::abs(a(p, q));
        if (g < 1e-300 || g < 1e-18 * fro) continue;
        const complex phase = a(p, q) / g;
        const double theta = (a(q, q).real() - a(p, p).real()) / (2.0 * g);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const complex jpp = c, jpq = s, jqp = -s * std::conj(phase), jqq = c * std::conj(phase);
        for (std::size_t i = 0; i < n; ++i) {
          const complex aip = a(i, p), aiq = a(i, q);
          a(i, p) = aip * jpp + aiq * jqp;
          a(i, q) = aip * jpq + aiq * jqq;
          const complex vip = v(i, p), viq = v(i, q);
          v(i, p) = vip * jpp + viq * jqp;
          v(i, q) = vip * jpq + viq * jqq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const complex apj = a(p, j), aqj = a(q, j);
          a(p, j) = std::conj(jpp) * apj + std::conj(jqp) * aqj;
          a(q, j) = std::conj(jpq) * apj + std::conj(jqq) * aqj;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }
}

// Replace the basis of a (numerically) degenerate eigenspace by Gram-Schmidt
// applied to the projections of e_1, e_2, ... in canonical order.
inline void canonical_cluster_basis(Matrix& v, std::size_t first, std::size_t count) {
  const std::size_t n = v.rows();
  const Matrix w = v.columns(first, count);
  const Matrix proj = w * w.adjoint();
  std::vector<std::vector<complex>> basis;
  for (std::size_t e = 0; e < n && basis.size() < count; ++e) {
    std::vector<complex> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = proj(i, e);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        complex dot{};
        for (std::size_t i = 0; i < n; ++i) dot += std::conj(b[i]) * x[i];
        for (std::size_t i = 0; i < n; ++i) x[i] -= dot * b[i];
      }
    double nrm = 0;
    for (const auto& xi : x) nrm += std::norm(xi);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-3) continue;
    for (auto& xi : x) xi /= nrm;
    basis.push_back(std::move(x));
  }
  if (basis.size() != count) return;  // keep the Jacobi basis
  for (std::size_t c = 0; c < count; ++c)
    for (std::size_t i = 0; i < n; ++i) v(i, first + c) = basis[c][i];
}

inline void fix_phase(Matrix& v, std::size_t col) {
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const double mag = std::abs(v(i, col));
    if (mag > 1e-8) {
      const complex ph = std::conj(v(i, col)) / mag;
      for (std::size_t r = 0; r < v.rows(); ++r) v(r, col) *= ph;
      v(i, col) = std::abs(v(i, col));
      return;
    }
  }
}

}  // namespace detail

// Ascending eigenvalues and orthonormal eigenvectors. Deterministic: fixed
// sweep order, degenerate clusters re-based against the canonical basis, and
// each eigenvector's first non-negligible component made real positive.
inline Spectrum eigh(const Hermitian& h) {
  const std::size_t n = h.dim();
  Matrix a = h.matrix();
  Matrix v = Matrix::identity(n);
  detail::jacobi_sweeps(a, v);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  Spectrum s;
  s.values.resize(n);
  s.vectors = Matrix(n);
  for (std::size_t c = 0; c < n; ++c) {
    s.values[c] = a(order[c], order[c]).real();
    for (std::size_t i = 0; i < n; ++i) s.vectors(i, c) = v(i, order[c]);
  }

  double scale = 1.0;
  for (double x : s.values) scale = std::max(scale, std::abs(x));
  const double tie = 1e-11 * scale;
  for (std::size_t first = 0; first < n;) {
    std::size_t last = first + 1;
    while (last < n && s.values[last] - s.values[last - 1] <= tie) ++last;
    if (last - first > 1) detail::canonical_cluster_basis(s.vectors, first, last - first);
    first = last;
  }
  for (std::size_t c = 0; c < n; ++c) detail::fix_phase(s.vectors, c);
  return s;
}

inline std::vector<double> eigenvalues(const Hermitian& h) { return eigh(h).values; }

// V f(Λ) V* for the spectrum of h.
inline Matrix apply_function(const Spectrum& s, const std::function<complex(double)>& f) {
  const std::size_t n = s.values.size();
  Matrix scaled = s.vectors;
  for (std::size_t c = 0; c < n; ++c) {
    const complex fc = f(s.values[c]);
    for (std::size_t i = 0; i < n; ++i) scaled(i, c) *= fc;
  }
  return scaled * s.vectors.adjoint();
}

inline Hermitian apply_real_function(const Spectrum& s, const std::function<double(double)>& f) {
  return Hermitian(unchecked, apply_function(s, [&](double x) { return complex(f(x)); }));
}

inline double op_norm(const Hermitian& h) {
  const auto vals = eigenvalues(h);
  return std::max(std::abs(vals.front()), std::abs(vals.back()));
}

// Largest singular value.
inline double op_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  const auto vals = eigenvalues(Hermitian(unchecked, m.adjoint() * m));
  return std::sqrt(std::max(0.0, vals.back()));
}

// Unitary matrix; construction checks ||U*U - I||_op.
class Unitary {
 public:
  Unitary() = default;
  explicit Unitary(Matrix m, double tolerance = kUnitaryTolerance) : m_(std::move(m)) {
    if (!m_.square() || m_.rows() == 0) throw NonUnitaryInput("matrix must be square with dim >= 1");
    const double defect = op_norm(m_.adjoint() * m_ - Matrix::identity(m_.rows()));
    if (defect > tolerance) throw NonUnitaryInput("||U*U - I|| = " + std::to_string(defect));
  }
  Unitary(unchecked_t, Matrix m) : m_(std::move(m)) {}

  static Unitary identity(std::size_t dim) { return Unitary(unchecked, Matrix::identity(dim)); }

  const Matrix& matrix() const { return m_; }
  std::size_t dim() const { return m_.rows(); }
  Unitary adjoint() const { return Unitary(unchecked, m_.adjoint()); }

  friend Unitary operator*(const Unitary& a, const Unitary& b) { return Unitary(unchecked, a.m_ * b.m_); }
  friend bool operator==(const Unitary&, const Unitary&) = default;

  // u h u*
  Hermitian conjugate(const Hermitian& h) const { return Hermitian(unchecked, m_ * h.matrix() * m_.adjoint()); }

 private:
  Matrix m_;
};

inline double unitarity_defect(const Matrix& u) {
  return op_norm(u.adjoint() * u - Matrix::identity(u.rows()));
}

// Spectrum of a matrix that should be positive semidefinite: small negative
// eigenvalues are clamped to zero, clearly negative ones are rejected.
inline Spectrum positive_eigh(const Hermitian& a) {
  Spectrum s = eigh(a);
  if (s.values.front() < -kNegativeError)
    throw NegativeInput("minimum eigenvalue " + std::to_string(s.values.front()));
  for (double& x : s.values) x = std::max(0.0, x);
  return s;
}

// e_s(a) = (a - s)_+
inline Hermitian cutdown(const Hermitian& a, double s) {
  const Spectrum sp = positive_eigh(a);
  return apply_real_function(sp, [s](double x) { return std::max(0.0, x - s); });
}

// #{eigenvalues strictly greater than t}: the rank of e_t(a).
inline std::size_t counting(std::span<const double> ascending, double t) {
  return static_cast<std::size_t>(ascending.end() - std::upper_bound(ascending.begin(), ascending.end(), t));
}

inline std::size_t counting(const Hermitian& a, double t) {
  const auto vals = positive_eigh(a).values;
  return counting(vals, t);
}

inline double rank_threshold(std::span<const double> ascending, double relative = kRankThreshold) {
  double norm = 0;
  for (double x : ascending) norm = std::max(norm, std::abs(x));
  return relative * std::max(1.0, norm);
}

inline std::size_t numerical_rank(const Hermitian& a, double relative = kRankThreshold) {
  const auto vals = eigenvalues(a);
  const double eta = rank_threshold(vals, relative);
  return static_cast<std::size_t>(std::count_if(vals.begin(), vals.end(), [eta](double x) { return x > eta; }));
}

// Gauss-Jordan with partial pivoting.
inline Matrix inverse(const Matrix& m) {
  if (!m.square()) throw DimensionMismatch("inverse of non-square matrix");
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  const double scale = std::max(m.max_abs(), 1e-300);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) <= 1e-14 * scale) throw SingularInput("pivot vanished in inverse");
    if (piv != col)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    const complex d = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const complex f = a(r, col);
      if (f == complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

namespace detail {

// Inverse-free Newton-Schulz step toward the unitary polar factor.
inline Matrix polish_unitary(Matrix u, int steps = 2) {
  const Matrix eye = Matrix::identity(u.rows());
  for (int i = 0; i < steps; ++i) u = u * (3.0 * eye - u.adjoint() * u) * complex(0.5);
  return u;
}

}  // namespace detail

// Unitary polar factor of m, the unitary closest to m in Frobenius norm.
inline Unitary nearest_unitary(const Matrix& m) {
  if (!m.square() || m.rows() == 0) throw DimensionMismatch("nearest_unitary needs a square matrix");
  const Spectrum gram = eigh(Hermitian(unchecked, m.adjoint() * m));
  const double smin = std::sqrt(std::max(0.0, gram.values.front()));
  if (smin <= 1e-8) throw SingularInput("smallest singular value " + std::to_string(smin));
  const Matrix inv_sqrt = apply_function(gram, [](double x) { return complex(1.0 / std::sqrt(x)); });
  return Unitary(unchecked, detail::polish_unitary(m * inv_sqrt));
}

// exp(i h)
inline Unitary exp_i(const Hermitian& h, double scale = 1.0) {
  const Spectrum s = eigh(h);
  return Unitary(unchecked, apply_function(s, [scale](double x) { return std::polar(1.0, scale * x); }));
}

inline constexpr double kBranchMargin = 1e-6;

// Hermitian h with exp(i h) = u and eigenvalues in (-pi, pi). Uses the Cayley
// transform tan(h/2) = i (1 - u)(1 + u)^{-1}, which shares eigenvectors with u.
inline Hermitian unitary_log(const Unitary& u) {
  const std::size_t n = u.dim();
  const Matrix eye = Matrix::identity(n);
  Matrix plus_inv;
  try {
    plus_inv = inverse(eye + u.matrix());
  } catch (const SingularInput&) {
    throw BranchCut("eigenvalue -1 in spectrum");
  }
  const Hermitian cayley(unchecked, complex(0, 1) * (eye - u.matrix()) * plus_inv);
  const Spectrum s = eigh(cayley);
  const double limit = std::tan(0.5 * (std::numbers::pi - kBranchMargin));
  if (std::max(std::abs(s.values.front()), std::abs(s.values.back())) > limit)
    throw BranchCut("eigenvalue within angular margin of -1");
  const Matrix rotated = s.vectors.adjoint() * u.matrix() * s.vectors;
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i) {
    angles[i] = std::arg(rotated(i, i));
    if (std::abs(angles[i]) > std::numbers::pi - kBranchMargin)
      throw BranchCut("eigenvalue within angular margin of -1");
  }
  Matrix scaled = s.vectors;
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t i = 0; i < n; ++i) scaled(i, c) *= angles[c];
  return Hermitian(unchecked, scaled * s.vectors.adjoint());
}

// A logarithm defined on all of U(n): rotate u by a scalar phase so the
// widest gap in its spectrum faces -1, take the principal logarithm, and add
// the phase back. exp(i h) = u, but ||h|| may exceed pi.
inline Hermitian unitary_log_any(const Unitary& u) {
  const std::size_t n = u.dim();
  constexpr int kShifts = 16;
  for (int m = 0; m < kShifts; ++m) {
    const double phi = 2.0 * std::numbers::pi * m / kShifts;
    Hermitian probe;
    try {
      probe = unitary_log(Unitary(unchecked, u.matrix() * std::polar(1.0, -phi)));
    } catch (const BranchCut&) {
      continue;
    }
    std::vector<double> angles = eigenvalues(probe);
    for (double& a : angles) a = std::remainder(a + phi, 2.0 * std::numbers::pi);
    std::sort(angles.begin(), angles.end());
    double best_gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
    double centre = angles.back() + 0.5 * best_gap;
    for (std::size_t i = 0; i + 1 < angles.size(); ++i) {
      const double gap = angles[i + 1] - angles[i];
      if (gap > best_gap) {
        best_gap = gap;
        centre = angles[i] + 0.5 * gap;
      }
    }
    // Put the gap centre at -1, i.e. rotate by centre - pi.
    const double shift = centre - std::numbers::pi;
    const Hermitian h = unitary_log(Unitary(unchecked, u.matrix() * std::polar(1.0, -shift)));
    return h + shift * Hermitian::identity(n);
  }
  throw BranchCut("no scalar rotation clears -1");  // unreachable for n < 16
}

}  // namespace orbitdist
