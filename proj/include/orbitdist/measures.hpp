#pragma once

// Finitely supported spectral measures on (0, 1] and the Levy-Prokhorov
// comparison between them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "orbitdist/errors.hpp"
#include "orbitdist/linalg.hpp"
#include "orbitdist/maxflow.hpp"

namespace orbitdist {

struct Atom {
  double location;
  double weight;
  friend bool operator==(const Atom&, const Atom&) = default;
};

inline constexpr double kAtomMergeTolerance = 1e-12;

// Positive measure with finitely many atoms in (0, 1], stored with strictly
// increasing locations.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;

  explicit AtomicMeasure(std::vector<Atom> atoms) {
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const Atom& x, const Atom& y) { return x.location < y.location; });
    for (const Atom& a : atoms) {
      if (!(a.location > 0.0 && a.location <= 1.0))
        throw InvalidParams("atom location " + std::to_string(a.location) + " outside (0, 1]");
      if (!(a.weight > 0.0)) throw InvalidParams("atom weight must be positive");
      if (!atoms_.empty() && a.location - atoms_.back().location <= kAtomMergeTolerance)
        atoms_.back().weight += a.weight;
      else
        atoms_.push_back(a);
    }
    for (const Atom& a : atoms_) total_ += a.weight;
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  double total_mass() const { return total_; }

  friend bool operator==(const AtomicMeasure&, const AtomicMeasure&) = default;

 private:
  std::vector<Atom> atoms_;
  double total_ = 0.0;
};

// A trace on a model algebra: the matrix trace, or the matrix trace of the
// fibre at x, scaled by `normalization`.
struct TraceSpec {
  enum class Kind { matrix_trace, point_evaluation };
  Kind kind = Kind::matrix_trace;
  double x = 0.0;
  double normalization = 1.0;

  static TraceSpec matrix(double normalization = 1.0) { return {Kind::matrix_trace, 0.0, normalization}; }
  static TraceSpec at(double x, double normalization = 1.0) {
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidParams("trace point outside [0, 1]");
    return {Kind::point_evaluation, x, normalization};
  }
};

inline constexpr double kContractionTolerance = 1e-9;

// mu_{tau,a}: one atom per eigenvalue above the rank threshold, weighted by
// multiplicity times the trace normalization. The kernel of 0 carries no mass.
inline AtomicMeasure measure_from_eigenvalues(std::span<const double> ascending, double normalization = 1.0) {
  if (!ascending.empty() && ascending.back() > 1.0 + kContractionTolerance)
    throw NotAContraction("maximum eigenvalue " + std::to_string(ascending.back()));
  if (!ascending.empty() && ascending.front() < -kNegativeError)
    throw NegativeInput("minimum eigenvalue " + std::to_string(ascending.front()));
  const double eta = rank_threshold(ascending);
  std::vector<Atom> atoms;
  for (double x : ascending)
    if (x > eta) atoms.push_back({std::min(x, 1.0), normalization});
  return AtomicMeasure(std::move(atoms));
}

inline AtomicMeasure measure_from_spectrum(const Hermitian& a, const TraceSpec& trace = TraceSpec::matrix()) {
  const auto vals = eigenvalues(a);
  return measure_from_eigenvalues(vals, trace.normalization);
}

// d_tau(a) = lim tau(a^{1/n}): the trace of the support projection.
inline double dimension_function(const Hermitian& a, const TraceSpec& trace = TraceSpec::matrix()) {
  return measure_from_spectrum(a, trace).total_mass();
}

inline constexpr double kStrictMargin = 1e-12;
inline constexpr double kWeightScale = 1099511627776.0;  // 2^40

namespace detail {

inline std::int64_t scaled_weight(double w) { return static_cast<std::int64_t>(std::llround(w * kWeightScale)); }

// Slack in scaled units for rounding each atom weight to the 2^-40 grid.
inline std::int64_t rounding_slack(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  return static_cast<std::int64_t>(mu.size() + nu.size());
}

// Hall feasibility of transporting all of nu into mu along edges accepted by
// `adjacent(|x - y|)`.
template <class Adjacent>
bool hall_feasible(const AtomicMeasure& mu, const AtomicMeasure& nu, Adjacent adjacent) {
  if (nu.empty()) return true;
  const std::size_t source = 0, sink = 1, nu0 = 2, mu0 = 2 + nu.size();
  PushRelabel flow(2 + nu.size() + mu.size());
  std::int64_t demand = 0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const auto w = scaled_weight(nu.atoms()[i].weight);
    demand += w;
    flow.add_edge(source, nu0 + i, w);
  }
  std::int64_t supply = 0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const auto w = scaled_weight(mu.atoms()[j].weight);
    supply += w;
    flow.add_edge(mu0 + j, sink, w);
  }
  const std::int64_t unbounded = demand + supply + 1;
  for (std::size_t i = 0; i < nu.size(); ++i)
    for (std::size_t j = 0; j < mu.size(); ++j)
      if (adjacent(std::abs(nu.atoms()[i].location - mu.atoms()[j].location)))
        flow.add_edge(nu0 + i, mu0 + j, unbounded);
  return flow.max_flow(source, sink) >= demand - rounding_slack(mu, nu);
}

}  // namespace detail

// Edge rule for the strict neighbourhood: |x - y| < r, with coincident atoms
// always adjacent (U_0 is taken to be U, so the test is monotone from r = 0).
inline bool strictly_within(double d, double r) { return d < r - kStrictMargin || d <= kStrictMargin; }

// True iff mu(U_r) >= nu(U) for every open U in (0, 1], where
// U_r = {t : dist(t, U) < r}. Only unions of r-balls around atoms of nu
// matter, so this is Hall's condition on the graph |x - y| < r, decided by
// max-flow.
inline bool lp_one_sided(const AtomicMeasure& mu, const AtomicMeasure& nu, double r) {
  return detail::hall_feasible(mu, nu, [r](double d) { return strictly_within(d, r); });
}

// Same decision by enumerating every subset S of nu's atoms and checking
// mu(union of r-balls around S) >= nu(S). Exponential; for oracles only.
inline bool lp_one_sided_exhaustive(const AtomicMeasure& mu, const AtomicMeasure& nu, double r) {
  const std::size_t m = nu.size();
  if (m > 20) throw InvalidParams("exhaustive check limited to 20 atoms");
  const double slack = static_cast<double>(detail::rounding_slack(mu, nu)) / kWeightScale;
  for (std::uint64_t subset = 1; subset < (std::uint64_t{1} << m); ++subset) {
    double need = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (subset >> i & 1) need += nu.atoms()[i].weight;
    double have = 0.0;
    for (const Atom& x : mu.atoms()) {
      bool near = false;
      for (std::size_t i = 0; i < m && !near; ++i)
        near = (subset >> i & 1) && strictly_within(std::abs(x.location - nu.atoms()[i].location), r);
      if (near) have += x.weight;
    }
    if (have < need - slack) return false;
  }
  return true;
}

inline constexpr double kMassTolerance = 1e-9;

// inf{r > 0 : both one-sided conditions hold}. Feasibility only changes at
// pairwise atom distances, and the strict condition holds for every r above
// the smallest distance c at which the closed condition |x - y| <= c holds;
// that c is the infimum.
inline double lp_distance(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  if (std::abs(mu.total_mass() - nu.total_mass()) > kMassTolerance)
    throw MassMismatch("total masses " + std::to_string(mu.total_mass()) + " and " +
                       std::to_string(nu.total_mass()));
  std::vector<double> candidates{0.0};
  for (const Atom& x : mu.atoms())
    for (const Atom& y : nu.atoms()) candidates.push_back(std::abs(x.location - y.location));
  if (!mu.empty()) candidates.push_back(mu.atoms().back().location);
  if (!nu.empty()) candidates.push_back(nu.atoms().back().location);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  auto closed_feasible = [&](double c) {
    auto adjacent = [c](double d) { return d <= c + kStrictMargin; };
    return detail::hall_feasible(mu, nu, adjacent) && detail::hall_feasible(nu, mu, adjacent);
  };
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (closed_feasible(candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  if (!closed_feasible(candidates[lo])) throw MassMismatch("masses differ beyond rounding slack");
  return candidates[lo];
}

}  // namespace orbitdist
