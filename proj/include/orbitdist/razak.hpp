#pragma once

// Elements of a Razak block
//   { f in C([0,1], M_k (x) M_n) : f(0) = c (x) 1_{n-1}, f(1) = c (x) 1_n }
// sampled on the uniform grid x_j = j / N. The fibre M_{kn} is arranged as n
// diagonal M_k blocks, so f(0) = diag(c, ..., c, 0) and f(1) = diag(c, ..., c).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "orbitdist/distances.hpp"
#include "orbitdist/errors.hpp"
#include "orbitdist/linalg.hpp"
#include "orbitdist/measures.hpp"
#include "orbitdist/random.hpp"

namespace orbitdist {

struct RazakParams {
  std::size_t k = 1;
  std::size_t n = 2;
  std::size_t grid = 256;  // N; samples at j / N for j = 0..N
  double gamma = 0.125;

  std::size_t fiber_dim() const { return k * n; }
  std::size_t samples() const { return grid + 1; }
  double x(std::size_t j) const { return static_cast<double>(j) / static_cast<double>(grid); }
  // Last grid index inside [0, gamma]; the mirror index starts [1 - gamma, 1].
  std::size_t flat_last() const {
    return static_cast<std::size_t>(std::floor(gamma * static_cast<double>(grid) + 1e-9));
  }
  std::size_t flat_first_right() const { return grid - flat_last(); }

  void validate() const {
    if (k < 1) throw InvalidParams("k must be >= 1");
    if (n < 2) throw InvalidParams("n must be >= 2");
    if (grid < 8) throw InvalidParams("grid size must be >= 8");
    if (!(gamma > 0.0 && gamma < 0.5)) throw InvalidParams("gamma must lie in (0, 1/2)");
    if (gamma * static_cast<double>(grid) < 2.0 - 1e-9)
      throw InvalidParams("gamma * N must be >= 2 (two flat samples per end)");
  }

  friend bool operator==(const RazakParams&, const RazakParams&) = default;
};

inline void require_same_params(const RazakParams& a, const RazakParams& b) {
  if (!(a == b)) throw ParamsMismatch("elements sampled with different parameters");
}

inline Hermitian boundary_at_zero(const Hermitian& c, std::size_t n) {
  return Hermitian(unchecked, repeat_block(c.matrix(), n - 1, 1));
}
inline Hermitian boundary_at_one(const Hermitian& c, std::size_t n) {
  return Hermitian(unchecked, repeat_block(c.matrix(), n));
}

struct RazakElement {
  RazakParams params;
  Hermitian c;
  std::vector<Hermitian> samples;
  double lipschitz = 0.0;

  const Hermitian& at(std::size_t j) const { return samples[j]; }
};

// N * max_j ||s_{j+1} - s_j||.
template <class Sample>
double measured_lipschitz(const std::vector<Sample>& samples, std::size_t grid) {
  double step = 0.0;
  for (std::size_t j = 0; j + 1 < samples.size(); ++j)
    step = std::max(step, op_norm(samples[j + 1].matrix() - samples[j].matrix()));
  return step * static_cast<double>(grid);
}

inline constexpr double kBoundaryTolerance = 1e-10;

struct ValidationReport {
  double boundary_zero_defect = 0.0;
  double boundary_one_defect = 0.0;
  double flat_defect = 0.0;
  double lipschitz_excess = 0.0;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

inline ValidationReport validate(const RazakElement& e) {
  ValidationReport rep;
  try {
    e.params.validate();
  } catch (const InvalidParams& err) {
    rep.failures.push_back(err.what());
    return rep;
  }
  const auto& p = e.params;
  if (e.samples.size() != p.samples()) {
    rep.failures.push_back("expected " + std::to_string(p.samples()) + " samples");
    return rep;
  }
  if (e.c.dim() != p.k) {
    rep.failures.push_back("boundary core has wrong dimension");
    return rep;
  }
  for (const auto& s : e.samples)
    if (s.dim() != p.fiber_dim()) {
      rep.failures.push_back("sample has wrong dimension");
      return rep;
    }

  rep.boundary_zero_defect = op_norm(e.samples.front().matrix() - boundary_at_zero(e.c, p.n).matrix());
  rep.boundary_one_defect = op_norm(e.samples.back().matrix() - boundary_at_one(e.c, p.n).matrix());
  if (rep.boundary_zero_defect > kBoundaryTolerance) rep.failures.push_back("f(0) is not c (x) 1_{n-1} + 0");
  if (rep.boundary_one_defect > kBoundaryTolerance) rep.failures.push_back("f(1) is not c (x) 1_n");

  for (std::size_t j = 1; j <= p.flat_last(); ++j)
    rep.flat_defect = std::max(rep.flat_defect, op_norm(e.samples[j].matrix() - e.samples.front().matrix()));
  for (std::size_t j = p.flat_first_right(); j < p.grid; ++j)
    rep.flat_defect = std::max(rep.flat_defect, op_norm(e.samples[j].matrix() - e.samples.back().matrix()));
  if (rep.flat_defect > kBoundaryTolerance) rep.failures.push_back("not constant near the endpoints");

  rep.lipschitz_excess = std::max(0.0, measured_lipschitz(e.samples, p.grid) - e.lipschitz);
  if (rep.lipschitz_excess > 1e-9) rep.failures.push_back("recorded Lipschitz constant too small");

  rep.min_eigenvalue = 1.0;
  rep.max_eigenvalue = 0.0;
  for (const auto& s : e.samples) {
    const auto vals = eigenvalues(s);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, vals.front());
    rep.max_eigenvalue = std::max(rep.max_eigenvalue, vals.back());
  }
  if (rep.min_eigenvalue < -kNegativeClamp) rep.failures.push_back("sample not positive");
  if (rep.max_eigenvalue > 1.0 + kContractionTolerance) rep.failures.push_back("sample not a contraction");
  return rep;
}

// Clip the spectrum to [0, 1].
inline Hermitian clamp_contraction(const Hermitian& h) {
  return apply_real_function(eigh(h), [](double x) { return std::clamp(x, 0.0, 1.0); });
}

namespace detail {

// Smooth random path s -> sum_d A_d cos(2 pi d s) + B_d sin(2 pi d s).
struct TrigPath {
  std::vector<Matrix> cos_terms, sin_terms;

  TrigPath(Rng& rng, std::size_t dim, std::size_t degree) {
    for (std::size_t d = 0; d <= degree; ++d) {
      cos_terms.push_back(random_gaussian(rng, dim, dim));
      sin_terms.push_back(random_gaussian(rng, dim, dim));
    }
  }

  Matrix operator()(double s) const {
    Matrix m(cos_terms.front().rows());
    for (std::size_t d = 0; d < cos_terms.size(); ++d) {
      const double w = 2.0 * std::numbers::pi * static_cast<double>(d) * s;
      m += std::cos(w) * cos_terms[d];
      if (d > 0) m += std::sin(w) * sin_terms[d];
    }
    return m;
  }
};

inline double cosine_ramp(double s) { return 0.5 * (1.0 - std::cos(std::numbers::pi * s)); }
inline double bump(double s) {
  const double v = std::sin(std::numbers::pi * s);
  return v * v;
}

}  // namespace detail

inline constexpr std::size_t kGeneratorDegree = 2;

// Random positive contraction in the block, exactly constant on [0, gamma]
// and [1 - gamma, 1]. In between it follows
//   (1 - ramp) f(0) + ramp f(1) + kappa bump G G*
// with G a random trigonometric path. The rank is (n-1)k at the flat left end
// and nk everywhere else. With full_spectrum, kappa is tuned so the largest
// eigenvalue over the grid is 1; the eigenvalue curves then sweep all of
// [0, 1] (they connect 0 at the left end to the spectrum of c at the right).
inline RazakElement gen_random(const RazakParams& params, std::uint64_t seed, bool full_spectrum) {
  params.validate();
  Rng rng(seed);
  const std::size_t k = params.k, n = params.n, dim = params.fiber_dim();

  std::vector<double> alpha(k);
  for (auto& a : alpha) a = rng.uniform(0.05, 0.95);
  std::sort(alpha.begin(), alpha.end());
  const Hermitian c = random_with_spectrum(rng, alpha);
  const Hermitian left = boundary_at_zero(c, n), right = boundary_at_one(c, n);
  const detail::TrigPath g(rng, dim, kGeneratorDegree);
  const double fraction = rng.uniform(0.2, 0.8);

  const std::size_t jl = params.flat_last(), jr = params.flat_first_right();
  const double span = 1.0 - 2.0 * params.gamma;
  std::vector<Hermitian> base(params.samples()), push(params.samples());
  for (std::size_t j = jl + 1; j < jr; ++j) {
    const double s = std::clamp((params.x(j) - params.gamma) / span, 0.0, 1.0);
    const double ramp = detail::cosine_ramp(s);
    base[j] = (1.0 - ramp) * left + ramp * right;
    const Matrix gs = g(s);
    push[j] = Hermitian(unchecked, detail::bump(s) * (gs * gs.adjoint()));
  }

  auto top = [&](double kappa) {
    double m = 0.0;
    for (std::size_t j = jl + 1; j < jr; ++j) m = std::max(m, eigenvalues(base[j] + kappa * push[j]).back());
    return m;
  };
  // The top eigenvalue is convex and increasing in kappa: bracket 1, bisect.
  double lo = 0.0, hi = 1.0;
  while (top(hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double t = top(mid);
    if (t > 1.0) {
      hi = mid;
    } else {
      lo = mid;
      if (t >= 1.0 - 1e-12) break;
    }
  }
  const double kappa = full_spectrum ? lo : fraction * lo;

  RazakElement e;
  e.params = params;
  e.c = c;
  e.samples.resize(params.samples());
  for (std::size_t j = 0; j <= jl; ++j) e.samples[j] = left;
  for (std::size_t j = jr; j <= params.grid; ++j) e.samples[j] = right;
  for (std::size_t j = jl + 1; j < jr; ++j) e.samples[j] = clamp_contraction(base[j] + kappa * push[j]);
  e.lipschitz = measured_lipschitz(e.samples, params.grid);
  return e;
}

// Doubles the grid `times` times, inserting midpoints (a convex combination
// of positive contractions stays one, so no re-clamping is needed beyond
// rounding).
inline RazakElement refine(const RazakElement& e, int times) {
  if (times <= 0) return e;
  RazakElement r = e;
  for (int t = 0; t < times; ++t) {
    std::vector<Hermitian> finer;
    finer.reserve(2 * r.samples.size() - 1);
    for (std::size_t j = 0; j + 1 < r.samples.size(); ++j) {
      finer.push_back(r.samples[j]);
      finer.push_back(0.5 * (r.samples[j] + r.samples[j + 1]));
    }
    finer.push_back(r.samples.back());
    r.samples = std::move(finer);
    r.params.grid *= 2;
  }
  return r;
}

// Sorted eigenvalues of every fibre.
inline std::vector<std::vector<double>> fiber_spectra(const RazakElement& e) {
  std::vector<std::vector<double>> out;
  out.reserve(e.samples.size());
  for (const auto& s : e.samples) out.push_back(positive_eigh(s).values);
  return out;
}

inline double sup_norm(const RazakElement& e) {
  double m = 0.0;
  for (const auto& s : e.samples) m = std::max(m, op_norm(s));
  return m;
}

inline double dist_norm(const RazakElement& a, const RazakElement& b) {
  require_same_params(a.params, b.params);
  double m = 0.0;
  for (std::size_t j = 0; j < a.samples.size(); ++j) m = std::max(m, op_norm(a.samples[j] - b.samples[j]));
  return m;
}

// Cuntz distance in the block, computed fibrewise: pointwise rank comparison
// reduces to the ascending-eigenvalue bottleneck at each grid point.
inline double d_w_path(const RazakElement& a, const RazakElement& b) {
  require_same_params(a.params, b.params);
  double m = 0.0;
  for (std::size_t j = 0; j < a.samples.size(); ++j) m = std::max(m, d_w_matrix(a.samples[j], b.samples[j]));
  return m;
}

// Grid indices whose point-evaluation traces are quantified over.
inline std::vector<std::size_t> trace_grid(const RazakParams& p, std::size_t stride = 1) {
  if (stride == 0) throw InvalidParams("trace stride must be positive");
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j <= p.grid; j += stride) idx.push_back(j);
  if (idx.back() != p.grid) idx.push_back(p.grid);
  return idx;
}

// Spectral measure of e under Tr o ev_x; x must be a grid point.
inline AtomicMeasure fiber_measure(const RazakElement& e, const TraceSpec& trace) {
  if (trace.kind == TraceSpec::Kind::matrix_trace) throw InvalidParams("fibre measure needs a point evaluation");
  const double pos = trace.x * static_cast<double>(e.params.grid);
  const auto j = static_cast<std::size_t>(std::llround(pos));
  if (std::abs(pos - static_cast<double>(j)) > 1e-9) throw InvalidParams("trace point is not on the grid");
  return measure_from_spectrum(e.samples[j], trace);
}

// Levy-Prokhorov distance maximised over the point-evaluation traces at the
// given grid indices. MassMismatch from any fibre propagates.
inline double d_p_path(const RazakElement& a, const RazakElement& b, const std::vector<std::size_t>& traces) {
  require_same_params(a.params, b.params);
  double m = 0.0;
  for (std::size_t j : traces) {
    const TraceSpec tau = TraceSpec::at(a.params.x(j));
    m = std::max(m, lp_distance(fiber_measure(a, tau), fiber_measure(b, tau)));
  }
  return m;
}

inline double d_p_path(const RazakElement& a, const RazakElement& b) {
  return d_p_path(a, b, trace_grid(a.params));
}

// Largest bottleneck (optimal matching) distance over the fibres.
inline double delta_path(const RazakElement& a, const RazakElement& b) {
  require_same_params(a.params, b.params);
  double m = 0.0;
  for (std::size_t j = 0; j < a.samples.size(); ++j)
    m = std::max(m, delta_matching(positive_eigh(a.samples[j]).values, positive_eigh(b.samples[j]).values));
  return m;
}

struct SpectralCoverage {
  double max_gap = 0.0;         // largest piece of [0, 1] missed by the eigenvalue curves
  double max_eigenvalue = 0.0;  // over all samples
};

// Union of the images of the piecewise-linear sorted eigenvalue curves.
inline SpectralCoverage spectral_coverage(const RazakElement& e) {
  const auto spectra = fiber_spectra(e);
  std::vector<std::pair<double, double>> pieces;
  SpectralCoverage cov;
  for (std::size_t j = 0; j < spectra.size(); ++j) {
    cov.max_eigenvalue = std::max(cov.max_eigenvalue, spectra[j].back());
    if (j + 1 == spectra.size()) break;
    for (std::size_t i = 0; i < spectra[j].size(); ++i) {
      const double u = spectra[j][i], v = spectra[j + 1][i];
      pieces.emplace_back(std::min(u, v), std::max(u, v));
    }
  }
  std::sort(pieces.begin(), pieces.end());
  double reach = 0.0;
  for (const auto& [lo, hi] : pieces) {
    if (lo > reach) cov.max_gap = std::max(cov.max_gap, lo - reach);
    reach = std::max(reach, hi);
  }
  cov.max_gap = std::max(cov.max_gap, 1.0 - reach);
  return cov;
}

inline bool has_full_spectrum(const RazakElement& e) {
  const auto cov = spectral_coverage(e);
  const double n = static_cast<double>(e.params.grid);
  return cov.max_gap <= 1.0 / n && cov.max_eigenvalue >= 1.0 - 2.0 / n;
}

// Unitaries w in the unitization: w - 1 lies in the block, so
// w(0) = diag(d, ..., d, 1) and w(1) = diag(d, ..., d) for one d in U(k).
struct UnitizedUnitaryPath {
  RazakParams params;
  std::vector<Unitary> samples;
};

inline constexpr double kMembershipTolerance = 1e-8;

// Distance of w(0) - 1 and w(1) - 1 from the required block forms, with the
// core d read off the first block of w(1).
inline double membership_defect(const UnitizedUnitaryPath& w) {
  const std::size_t k = w.params.k, n = w.params.n;
  const Matrix core = w.samples.back().matrix().block(0, 0, k, k);
  Matrix at_zero = repeat_block(core, n - 1, 1);
  at_zero.set_block((n - 1) * k, (n - 1) * k, Matrix::identity(k));
  const Matrix at_one = repeat_block(core, n);
  return std::max(op_norm(w.samples.front().matrix() - at_zero), op_norm(w.samples.back().matrix() - at_one));
}

inline double max_unitarity_defect(const UnitizedUnitaryPath& w) {
  double m = 0.0;
  for (const auto& u : w.samples) m = std::max(m, unitarity_defect(u.matrix()));
  return m;
}

inline UnitizedUnitaryPath identity_path(const RazakParams& p) {
  return {p, std::vector<Unitary>(p.samples(), Unitary::identity(p.fiber_dim()))};
}

inline void require_member(const UnitizedUnitaryPath& w) {
  if (w.samples.size() != w.params.samples()) throw MembershipViolation("wrong sample count");
  const double defect = membership_defect(w);
  if (defect > kMembershipTolerance) throw MembershipViolation("boundary defect " + std::to_string(defect));
}

// Pointwise w_j a_j w_j*.
inline RazakElement conjugate(const RazakElement& a, const UnitizedUnitaryPath& w) {
  require_same_params(a.params, w.params);
  require_member(w);
  RazakElement r = a;
  for (std::size_t j = 0; j < a.samples.size(); ++j) r.samples[j] = w.samples[j].conjugate(a.samples[j]);
  // Core of the conjugate is d c d*.
  const Unitary d(unchecked, w.samples.back().matrix().block(0, 0, a.params.k, a.params.k));
  r.c = d.conjugate(a.c);
  r.lipschitz = measured_lipschitz(r.samples, r.params.grid);
  return r;
}

// max_j ||w_j a_j w_j* - b_j||.
inline double unitary_error(const RazakElement& a, const RazakElement& b, const UnitizedUnitaryPath& w) {
  require_same_params(a.params, b.params);
  require_same_params(a.params, w.params);
  require_member(w);
  double m = 0.0;
  for (std::size_t j = 0; j < a.samples.size(); ++j)
    m = std::max(m, op_norm(w.samples[j].conjugate(a.samples[j]) - b.samples[j]));
  return m;
}

// A random member of the unitization: exp(i bump K) exp(i ramp H) w(0), with
// w(1) w(0)* = exp(i H).
inline UnitizedUnitaryPath gen_random_unitary_path(const RazakParams& params, std::uint64_t seed,
                                                   double amplitude = 1.0) {
  params.validate();
  Rng rng(seed);
  const std::size_t k = params.k, n = params.n, dim = params.fiber_dim();
  const Unitary core = random_unitary(rng, k);
  Matrix w0 = repeat_block(core.matrix(), n - 1, 1);
  w0.set_block((n - 1) * k, (n - 1) * k, Matrix::identity(k));
  const Matrix w1 = repeat_block(core.matrix(), n);
  const Hermitian h = unitary_log_any(Unitary(unchecked, w1 * w0.adjoint()));
  const Hermitian wiggle = amplitude * random_hermitian(rng, dim);

  UnitizedUnitaryPath w{params, {}};
  const std::size_t jl = params.flat_last(), jr = params.flat_first_right();
  const double span = 1.0 - 2.0 * params.gamma;
  for (std::size_t j = 0; j <= params.grid; ++j) {
    if (j <= jl) {
      w.samples.emplace_back(unchecked, w0);
    } else if (j >= jr) {
      w.samples.emplace_back(unchecked, w1);
    } else {
      const double s = std::clamp((params.x(j) - params.gamma) / span, 0.0, 1.0);
      const Matrix m = exp_i(wiggle, detail::bump(s)).matrix() * exp_i(h, detail::cosine_ramp(s)).matrix() * w0;
      w.samples.emplace_back(unchecked, m);
    }
  }
  return w;
}

// One row per grid point: x followed by the ascending fibre eigenvalues.
inline std::string eigenvalue_csv(const RazakElement& e) {
  std::ostringstream out;
  out.precision(17);
  out << "j,x";
  for (std::size_t i = 0; i < e.params.fiber_dim(); ++i) out << ",lambda" << i;
  out << '\n';
  const auto spectra = fiber_spectra(e);
  for (std::size_t j = 0; j < spectra.size(); ++j) {
    out << j << ',' << e.params.x(j);
    for (double v : spectra[j]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

}  // namespace orbitdist
