#pragma once

// Construction of a unitary w in the unitization of a Razak block with
// sup_t ||w_t a_t w_t* - b_t|| < r + eps whenever r exceeds the Cuntz
// distance of a and b. The path is assembled in three pieces:
//
//   middle  [gamma, 1 - gamma]  w = v* u, where u, v continuously bring a, b
//                               to ascending diagonal form;
//   left    [0, gamma]          w = g* (x v0)* (x u0) f, with u0, v0 built
//                               from unitaries U, V diagonalizing the cores and
//                               f, g almost-commuting paths joining 1 to the
//                               middle frames;
//   right   [1 - gamma, 1]      the mirror image with U (x) 1_n, V (x) 1_n.
//
// Then w(0) = diag(V*U, ..., V*U, 1) and w(1) = diag(V*U, ..., V*U), so
// w - 1 lies in the block. Every bound is evaluated on the grid and reported
// in a certificate; nothing is assumed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "orbitdist/errors.hpp"
#include "orbitdist/linalg.hpp"
#include "orbitdist/razak.hpp"

namespace orbitdist {

// ---------------------------------------------------------------------------
// Spectral clustering helpers

struct Cluster {
  std::size_t first;
  std::size_t count;
};

// Split ascending values into runs whose consecutive gaps are below `gap`.
inline std::vector<Cluster> clusters_by_gap(std::span<const double> ascending, double gap) {
  std::vector<Cluster> out;
  for (std::size_t i = 0; i < ascending.size();) {
    std::size_t j = i + 1;
    while (j < ascending.size() && ascending[j] - ascending[j - 1] < gap) ++j;
    out.push_back({i, j - i});
    i = j;
  }
  return out;
}

// Split ascending values at their widest gaps until every group has diameter
// at most `diameter`. Returns the groups and the narrowest gap that was cut.
inline std::pair<std::vector<Cluster>, double> clusters_by_diameter(std::span<const double> ascending,
                                                                    double diameter) {
  std::vector<Cluster> done, todo{{0, ascending.size()}};
  double narrowest = std::numeric_limits<double>::infinity();
  while (!todo.empty()) {
    const Cluster c = todo.back();
    todo.pop_back();
    if (c.count <= 1 || ascending[c.first + c.count - 1] - ascending[c.first] <= diameter) {
      done.push_back(c);
      continue;
    }
    std::size_t cut = c.first + 1;
    for (std::size_t i = c.first + 1; i < c.first + c.count; ++i)
      if (ascending[i] - ascending[i - 1] > ascending[cut] - ascending[cut - 1]) cut = i;
    narrowest = std::min(narrowest, ascending[cut] - ascending[cut - 1]);
    todo.push_back({c.first, cut - c.first});
    todo.push_back({cut, c.first + c.count - cut});
  }
  std::sort(done.begin(), done.end(), [](const Cluster& x, const Cluster& y) { return x.first < y.first; });
  return {done, narrowest};
}

// ---------------------------------------------------------------------------
// Continuous diagonalization on [gamma, 1 - gamma]

struct DiagonalizationOptions {
  double delta = 0.0125;
  // Rotation within a cluster may cost at most this fraction of delta.
  double residual_fraction = 0.9;
  // Eigenvalues closer than this multiple of delta share a cluster. A pair
  // leaving a cluster has gap g and rotated at most about budget/g away from
  // its eigenvectors, so the jump at separation stays small.
  double cluster_gap_factor = 4.0;
  // Largest admissible jump ||u_{j+1} - u_j|| between grid points.
  double max_step = 0.5;
  int max_refinements = 6;
};

struct DiagonalPath {
  std::size_t first = 0;  // grid index of frames.front()
  std::vector<std::vector<double>> diagonals;
  std::vector<Unitary> frames;  // u_j with u_j a_j u_j* close to diag(diagonals[j])
  double max_residual = 0.0;
  double max_step = 0.0;

  bool within(const DiagonalizationOptions& opt) const {
    return max_residual < opt.delta && max_step <= opt.max_step;
  }
  const Unitary& at(std::size_t j) const { return frames[j - first]; }
};

namespace detail {

// Columns of `eigvecs` (ascending eigenvalues `values`) re-based within each
// cluster to stay close to `previous`: the Procrustes rotation toward the old
// frame, pulled back along its geodesic so the cluster residual
// ||B* L B - L|| fits the budget.
inline Matrix align_frame(std::span<const double> values, const Matrix& eigvecs, const Matrix& previous,
                          double budget, double cluster_gap, double& residual) {
  Matrix frame = eigvecs;
  residual = 0.0;
  for (const Cluster& cl : clusters_by_gap(values, cluster_gap)) {
    const Matrix basis = eigvecs.columns(cl.first, cl.count);
    const Matrix overlap = basis.adjoint() * previous.columns(cl.first, cl.count);
    Unitary q = Unitary::identity(cl.count);
    try {
      q = nearest_unitary(overlap);
    } catch (const SingularInput&) {
      // No usable overlap: keep the eigenbasis; the jump shows up in max_step.
    }
    if (cl.count == 1) {
      frame.set_columns(cl.first, basis * q.matrix());
      continue;
    }
    const std::span<const double> vals = values.subspan(cl.first, cl.count);
    const Hermitian lam = Hermitian::diagonal(vals);
    auto cost = [&](const Matrix& b) { return op_norm(Hermitian(unchecked, b.adjoint() * lam.matrix() * b) - lam); };
    // ||B* L B - L|| = ||[L, B]|| <= s ||[L, H]|| along B = exp(i s H).
    // Scaling s by this bound keeps the frame Lipschitz in x; the exact
    // residual would make s jump where the cost first reaches the budget.
    Matrix chosen = q.matrix();
    const Hermitian h = unitary_log_any(q);
    const double slope = op_norm(commutator(lam.matrix(), h.matrix()));
    if (slope > budget) {
      const double s = budget / slope;
      const Spectrum gen = eigh(h);
      chosen = apply_function(gen, [s](double th) { return std::polar(1.0, s * th); });
    }
    const double r = cost(chosen);
    residual = std::max(residual, r);
    frame.set_columns(cl.first, basis * chosen);
  }
  return frame;
}

}  // namespace detail

// Frames u_j for grid indices [first, last] with u_j e_j u_j* within delta of
// the ascending diagonal. `initial` (columns = eigenvectors in ascending
// order) seeds the alignment at `first`; without it the eigensolver's frame
// is used. No refinement.
inline DiagonalPath diagonalize_on_grid(const RazakElement& e, std::size_t first, std::size_t last,
                                        const DiagonalizationOptions& opt, const Matrix* initial = nullptr) {
  DiagonalPath path;
  path.first = first;
  const double budget = opt.residual_fraction * opt.delta;
  const double gap = opt.cluster_gap_factor * opt.delta;
  Matrix previous;
  for (std::size_t j = first; j <= last; ++j) {
    const Spectrum s = eigh(e.samples[j]);
    double residual = 0.0;
    Matrix frame;
    if (j == first && initial == nullptr)
      frame = s.vectors;
    else
      frame = detail::align_frame(s.values, s.vectors, j == first ? *initial : previous, budget, gap, residual);
    // Re-orthonormalize against rounding drift.
    frame = detail::polish_unitary(frame, 1);
    if (j > first) path.max_step = std::max(path.max_step, op_norm(frame - previous));
    path.max_residual = std::max(path.max_residual, residual);
    path.diagonals.push_back(s.values);
    path.frames.emplace_back(unchecked, frame.adjoint());
    previous = std::move(frame);
  }
  return path;
}

struct ContinuousDiagonalization {
  RazakElement element;  // refined as needed
  DiagonalPath path;
  int refinements = 0;
};

// Continuous diagonalization over [gamma, 1 - gamma], doubling the grid until
// both the residual and the step bound hold.
inline ContinuousDiagonalization continuous_diagonalization(const RazakElement& e,
                                                            const DiagonalizationOptions& opt) {
  const std::size_t jl = e.params.flat_last(), jr = e.params.flat_first_right();
  for (int level = 0; level <= opt.max_refinements; ++level) {
    RazakElement fine = refine(e, level);
    const std::size_t scale = std::size_t{1} << level;
    DiagonalPath path = diagonalize_on_grid(fine, jl * scale, jr * scale, opt);
    if (path.within(opt)) return {std::move(fine), std::move(path), level};
  }
  throw RefinementExhausted("no grid up to 2^" + std::to_string(opt.max_refinements) +
                            " refinements meets the step bound");
}

// ---------------------------------------------------------------------------
// Endpoint diagonalization and sorting permutations

// U in U(k) with U c U* diagonal, eigenvalues ascending.
inline Unitary endpoint_diagonalization(const RazakElement& e, int end) {
  if (end != 0 && end != 1) throw InvalidParams("end must be 0 or 1");
  return Unitary(unchecked, eigh(e.c).vectors.adjoint());
}

struct Permutation {
  std::vector<std::size_t> order;  // order[i] = source index of the i-th smallest entry

  Matrix matrix() const {
    Matrix x(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) x(i, order[i]) = 1.0;
    return x;
  }
  template <class T>
  std::vector<T> apply(std::span<const T> d) const {
    std::vector<T> out(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) out[i] = d[order[i]];
    return out;
  }
};

// x with x diag(d) x* ascending; ties broken by `tie_rank`, then index.
inline Permutation sort_permutation(std::span<const double> d, std::span<const std::size_t> tie_rank = {}) {
  Permutation p;
  p.order.resize(d.size());
  std::iota(p.order.begin(), p.order.end(), 0);
  std::stable_sort(p.order.begin(), p.order.end(), [&](std::size_t i, std::size_t j) {
    if (d[i] != d[j]) return d[i] < d[j];
    return !tie_rank.empty() && tie_rank[i] < tie_rank[j];
  });
  return p;
}

// Position-major rank of the block diagonal at an endpoint: at end 0 the
// zero block first, then position p of every c-block before position p + 1.
// Any diagonal built from one ascending list repeated blockwise (plus the
// zero block) is already ascending in this order, so the same permutation
// sorts both elements.
inline std::vector<std::size_t> endpoint_tie_ranks(std::size_t k, std::size_t n, int end) {
  std::vector<std::size_t> rank(k * n);
  const std::size_t full_blocks = end == 0 ? n - 1 : n;
  const std::size_t offset = end == 0 ? k : 0;
  for (std::size_t m = 0; m < full_blocks; ++m)
    for (std::size_t p = 0; p < k; ++p) rank[m * k + p] = offset + p * full_blocks + m;
  if (end == 0)
    for (std::size_t p = 0; p < k; ++p) rank[(n - 1) * k + p] = p;
  return rank;
}

// ---------------------------------------------------------------------------
// Almost-commuting paths

struct AlmostCommutingPath {
  std::vector<Unitary> samples;  // samples.front() = 1, samples.back() = u
  double max_commutator = 0.0;
  double cluster_gap = 0.0;  // narrowest gap between retained clusters
  double endpoint_defect = 0.0;
};

inline constexpr std::size_t kCommutatorProbes = 64;

// Path from 1 to u along which ||[f_s, a0]|| < eps/2, given ||[u, a0]|| < delta.
// Cluster the spectrum of a0 into groups of diameter eps/4, compress u onto
// the cluster blocks and polar-correct (u_bd commutes with the clustered a0),
// then follow exp(i 2s h_bd) to u_bd and u_bd exp(i (2s - 1) h_small) on to u.
inline AlmostCommutingPath almost_commuting_path(const Unitary& u, const Hermitian& a0, double eps, double delta,
                                                 std::size_t sample_count) {
  if (sample_count < 2) throw InvalidParams("path needs at least two samples");
  const double comm = op_norm(commutator(u.matrix(), a0.matrix()));
  if (!(comm < delta))
    throw InvalidParams("||[u, a0]|| = " + std::to_string(comm) + " is not below delta");
  const std::size_t dim = a0.dim();
  const Spectrum sp = eigh(a0);
  auto [clusters, narrowest] = clusters_by_diameter(sp.values, eps / 4.0);

  const Matrix& basis = sp.vectors;
  const Matrix rotated = basis.adjoint() * u.matrix() * basis;
  Matrix compressed(dim), log_bd(dim);
  for (const Cluster& cl : clusters) {
    const Matrix blk = rotated.block(cl.first, cl.first, cl.count, cl.count);
    const double smin =
        std::sqrt(std::max(0.0, eigenvalues(Hermitian(unchecked, blk.adjoint() * blk)).front()));
    if (smin < 0.5)
      throw ClusterGapFailure("compressed block has singular value " + std::to_string(smin) + " < 1/2");
    const Unitary w = nearest_unitary(blk);
    compressed.set_block(cl.first, cl.first, w.matrix());
    log_bd.set_block(cl.first, cl.first, unitary_log_any(w).matrix());
  }
  const Unitary u_bd(unchecked, basis * compressed * basis.adjoint());
  const Hermitian h_bd(unchecked, basis * log_bd * basis.adjoint());
  const Hermitian h_small = unitary_log(u_bd.adjoint() * u);

  const Spectrum gen_bd = eigh(h_bd), gen_small = eigh(h_small);
  auto at = [&](double s) {
    if (s <= 0.5) {
      const double t = 2.0 * s;
      return Unitary(unchecked, apply_function(gen_bd, [t](double th) { return std::polar(1.0, t * th); }));
    }
    const double t = 2.0 * s - 1.0;
    return Unitary(unchecked,
                   u_bd.matrix() * apply_function(gen_small, [t](double th) { return std::polar(1.0, t * th); }));
  };

  AlmostCommutingPath out;
  out.cluster_gap = narrowest;
  for (std::size_t i = 0; i < sample_count; ++i)
    out.samples.push_back(at(static_cast<double>(i) / static_cast<double>(sample_count - 1)));
  out.endpoint_defect = std::max(op_norm(out.samples.front().matrix() - Matrix::identity(dim)),
                                 op_norm(out.samples.back().matrix() - u.matrix()));
  out.samples.front() = Unitary::identity(dim);
  out.samples.back() = u;

  auto commutator_at = [&](const Unitary& f) { return op_norm(commutator(f.matrix(), a0.matrix())); };
  for (const auto& f : out.samples) out.max_commutator = std::max(out.max_commutator, commutator_at(f));
  for (std::size_t i = 0; i <= kCommutatorProbes; ++i)
    out.max_commutator =
        std::max(out.max_commutator, commutator_at(at(static_cast<double>(i) / static_cast<double>(kCommutatorProbes))));
  if (!(out.max_commutator < eps / 2.0))
    throw ClusterGapFailure("path commutator " + std::to_string(out.max_commutator) + " not below eps/2");
  return out;
}

// ---------------------------------------------------------------------------
// The builder

struct BuildRequest {
  RazakElement a, b;
  double r = 0.0;
  double epsilon = 0.05;
  std::optional<double> delta;  // default min(eps/4, g_min/8)
  int max_refinements = 6;
  int max_delta_halvings = 4;
};

inline BuildRequest make_request(const RazakElement& a, const RazakElement& b, double r, double epsilon) {
  BuildRequest req;
  req.a = a;
  req.b = b;
  req.r = r;
  req.epsilon = epsilon;
  return req;
}

inline constexpr double kCertificateDefectTolerance = 1e-8;

struct BuildCertificate {
  double sup_error = 0.0;
  double r = 0.0;
  double epsilon = 0.0;
  double unitarity_defect = 0.0;
  double membership_defect = 0.0;
  double continuity_constant = 0.0;
  int refinement_count = 0;
  double delta = 0.0;
  std::size_t grid = 0;
  double max_path_commutator = 0.0;
  double middle_residual = 0.0;
  // 2 L / N for the larger recorded Lipschitz constant: how far the sampled
  // sup may sit below the continuum sup.
  double lipschitz_slack = 0.0;

  bool pass() const {
    return sup_error < r + epsilon && unitarity_defect <= kCertificateDefectTolerance &&
           membership_defect <= kCertificateDefectTolerance;
  }
};

struct BuildResult {
  UnitizedUnitaryPath w;
  BuildCertificate certificate;
  RazakElement a, b;  // on the grid of w
};

// Narrowest gap cut when clustering the endpoint fibres at diameter eps/4.
inline double endpoint_cluster_gap(const RazakElement& a, const RazakElement& b, double eps) {
  double g = std::numeric_limits<double>::infinity();
  for (const RazakElement* e : {&a, &b})
    for (const Hermitian* s : {&e->samples.front(), &e->samples.back()})
      g = std::min(g, clusters_by_diameter(eigenvalues(*s), eps / 4.0).second);
  return g;
}

inline double default_delta(const RazakElement& a, const RazakElement& b, double eps) {
  return std::min(eps / 4.0, endpoint_cluster_gap(a, b, eps) / 8.0);
}

namespace detail {

inline Matrix endpoint_frame(const Unitary& core, std::size_t n, int end) {
  const std::size_t k = core.dim();
  if (end == 1) return repeat_block(core.matrix(), n);
  Matrix m = repeat_block(core.matrix(), n - 1, 1);
  m.set_block((n - 1) * k, (n - 1) * k, Matrix::identity(k));
  return m;
}

struct EndData {
  Matrix xu, xv;  // x u_end, x v_end
};

inline EndData end_data(const RazakElement& a, const Unitary& U, const Unitary& V, int end) {
  const std::size_t k = a.params.k, n = a.params.n;
  const Matrix u_end = endpoint_frame(U, n, end), v_end = endpoint_frame(V, n, end);
  // Blockwise diagonal of u_end a_end u_end*: the eigenvalues of c per block.
  const auto alpha = positive_eigh(a.c).values;
  std::vector<double> diag(k * n, 0.0);
  const std::size_t full = end == 0 ? n - 1 : n;
  for (std::size_t m = 0; m < full; ++m)
    for (std::size_t p = 0; p < k; ++p) diag[m * k + p] = alpha[p];
  const auto ranks = endpoint_tie_ranks(k, n, end);
  const Matrix x = sort_permutation(diag, ranks).matrix();
  return {x * u_end, x * v_end};
}

}  // namespace detail

inline BuildResult build_weyl_unitary(const BuildRequest& req) {
  const auto& a = req.a;
  const auto& b = req.b;
  require_same_params(a.params, b.params);
  for (const RazakElement* e : {&a, &b}) {
    const auto rep = validate(*e);
    if (!rep.passed()) throw InvalidParams("element fails validation: " + rep.failures.front());
  }
  if (!(req.epsilon > 0.0)) throw InvalidParams("epsilon must be positive");
  const double dw = d_w_path(a, b);
  if (!(req.r > dw))
    throw NotDominating("r = " + std::to_string(req.r) + " does not exceed d_W = " + std::to_string(dw));

  auto certify = [&](UnitizedUnitaryPath w, const RazakElement& fa, const RazakElement& fb, int level,
                     double delta) {
    BuildResult res{std::move(w), {}, fa, fb};
    auto& c = res.certificate;
    c.r = req.r;
    c.epsilon = req.epsilon;
    c.refinement_count = level;
    c.delta = delta;
    c.grid = fa.params.grid;
    c.sup_error = unitary_error(fa, fb, res.w);
    c.unitarity_defect = max_unitarity_defect(res.w);
    c.membership_defect = membership_defect(res.w);
    c.continuity_constant = measured_lipschitz(res.w.samples, fa.params.grid);
    c.lipschitz_slack = 2.0 * std::max(fa.lipschitz, fb.lipschitz) / static_cast<double>(fa.params.grid);
    return res;
  };

  if (dist_norm(a, b) == 0.0) return certify(identity_path(a.params), a, b, 0, 0.0);

  double delta = req.delta.value_or(default_delta(a, b, req.epsilon));
  if (!(delta > 0.0 && delta < req.epsilon / 2.0)) throw InvalidParams("delta must lie in (0, eps/2)");

  const Unitary U = endpoint_diagonalization(a, 0), V = endpoint_diagonalization(b, 0);
  const auto left = detail::end_data(a, U, V, 0);
  const auto right = detail::end_data(a, U, V, 1);
  const std::size_t n0 = a.params.grid;
  const std::size_t jl0 = a.params.flat_last(), jr0 = a.params.flat_first_right();

  std::string last_failure = "no attempt";
  for (int halving = 0; halving <= req.max_delta_halvings; ++halving, delta *= 0.5) {
    DiagonalizationOptions opt;
    opt.delta = delta;
    for (int level = 0; level <= req.max_refinements; ++level) {
      const RazakElement fa = refine(a, level), fb = refine(b, level);
      const std::size_t scale = std::size_t{1} << level;
      const std::size_t grid = n0 * scale, jl = jl0 * scale, jr = jr0 * scale;
      const Matrix seed_a = left.xu.adjoint(), seed_b = left.xv.adjoint();
      const DiagonalPath pa = diagonalize_on_grid(fa, jl, jr, opt, &seed_a);
      const DiagonalPath pb = diagonalize_on_grid(fb, jl, jr, opt, &seed_b);
      if (!pa.within(opt) || !pb.within(opt)) {
        last_failure = "middle diagonalization step bound";
        continue;
      }

      AlmostCommutingPath fl, gl, fr, gr;
      try {
        fl = almost_commuting_path(Unitary(unchecked, left.xu.adjoint() * pa.at(jl).matrix()), fa.samples.front(),
                                   req.epsilon, delta, jl + 1);
        gl = almost_commuting_path(Unitary(unchecked, left.xv.adjoint() * pb.at(jl).matrix()), fb.samples.front(),
                                   req.epsilon, delta, jl + 1);
        fr = almost_commuting_path(Unitary(unchecked, right.xu.adjoint() * pa.at(jr).matrix()), fa.samples.back(),
                                   req.epsilon, delta, grid - jr + 1);
        gr = almost_commuting_path(Unitary(unchecked, right.xv.adjoint() * pb.at(jr).matrix()), fb.samples.back(),
                                   req.epsilon, delta, grid - jr + 1);
      } catch (const ClusterGapFailure& err) {
        last_failure = err.what();
        break;  // retry with a smaller delta
      } catch (const BranchCut& err) {
        last_failure = err.what();
        break;
      }

      UnitizedUnitaryPath w{fa.params, {}};
      w.samples.reserve(grid + 1);
      const Matrix left_core = left.xv.adjoint() * left.xu;
      const Matrix right_core = right.xv.adjoint() * right.xu;
      for (std::size_t j = 0; j <= grid; ++j) {
        if (j <= jl) {
          w.samples.emplace_back(unchecked, gl.samples[j].matrix().adjoint() * left_core * fl.samples[j].matrix());
        } else if (j >= jr) {
          const std::size_t i = grid - j;
          w.samples.emplace_back(unchecked, gr.samples[i].matrix().adjoint() * right_core * fr.samples[i].matrix());
        } else {
          w.samples.emplace_back(unchecked, pb.at(j).matrix().adjoint() * pa.at(j).matrix());
        }
      }
      BuildResult res = certify(std::move(w), fa, fb, level, delta);
      res.certificate.middle_residual = std::max(pa.max_residual, pb.max_residual);
      res.certificate.max_path_commutator =
          std::max({fl.max_commutator, gl.max_commutator, fr.max_commutator, gr.max_commutator});
      return res;
    }
  }
  throw RefinementExhausted("unitary construction failed: " + last_failure);
}

}  // namespace orbitdist
