#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "orbitdist/distances.hpp"
#include "orbitdist/random.hpp"
#include "orbitdist/razak.hpp"

using namespace orbitdist;
using testing_helpers::blend_element;
using testing_helpers::make_element;
using testing_helpers::sampled;

namespace {

const RazakParams kSmall{2, 2, 32, 0.125};

}  // namespace

TEST(RazakParams, Validation) {
  EXPECT_NO_THROW(kSmall.validate());
  EXPECT_THROW((RazakParams{0, 2, 32, 0.125}).validate(), InvalidParams);
  EXPECT_THROW((RazakParams{1, 1, 32, 0.125}).validate(), InvalidParams);
  EXPECT_THROW((RazakParams{1, 2, 4, 0.125}).validate(), InvalidParams);
  EXPECT_THROW((RazakParams{1, 2, 32, 0.6}).validate(), InvalidParams);
  EXPECT_THROW((RazakParams{1, 2, 32, 0.05}).validate(), InvalidParams);  // gamma N < 2
  EXPECT_EQ(kSmall.fiber_dim(), 4u);
  EXPECT_EQ(kSmall.flat_last(), 4u);
  EXPECT_EQ(kSmall.flat_first_right(), 28u);
}

TEST(Validate, ZeroElementPasses) {
  const RazakElement z = make_element(kSmall, Hermitian::zero(2), [](double) { return Hermitian::zero(4); });
  EXPECT_TRUE(validate(z).passed());
}

TEST(Validate, DetectsWrongCore) {
  Rng rng(101);
  const Hermitian c = random_positive_contraction(rng, 2);
  RazakElement e = blend_element(kSmall, c);
  ASSERT_TRUE(validate(e).passed());
  const Hermitian other = random_positive_contraction(rng, 2);
  for (std::size_t j = kSmall.flat_first_right(); j <= kSmall.grid; ++j) e.samples[j] = boundary_at_one(other, 2);
  e.lipschitz = measured_lipschitz(e.samples, kSmall.grid);
  const auto rep = validate(e);
  EXPECT_FALSE(rep.passed());
  EXPECT_GT(rep.boundary_one_defect, 1e-3);
}

TEST(Validate, DetectsUnderstatedLipschitzAndNonFlatEnds) {
  Rng rng(102);
  RazakElement e = blend_element(kSmall, random_positive_contraction(rng, 2));
  e.lipschitz *= 0.5;
  EXPECT_FALSE(validate(e).passed());
  e.lipschitz *= 2.0;
  e.samples[1] = 0.9 * e.samples[1];
  e.lipschitz = measured_lipschitz(e.samples, kSmall.grid);
  EXPECT_FALSE(validate(e).passed());
}

TEST(GenRandom, PassesValidation) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (bool full : {false, true}) {
      const RazakElement e = gen_random({2, 3, 64, 0.125}, seed, full);
      const auto rep = validate(e);
      EXPECT_TRUE(rep.passed()) << (rep.failures.empty() ? "" : rep.failures.front());
    }
  }
}

TEST(GenRandom, Deterministic) {
  const RazakElement a = gen_random(kSmall, 7, true), b = gen_random(kSmall, 7, true);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t j = 0; j < a.samples.size(); ++j) EXPECT_EQ(a.samples[j], b.samples[j]);
  EXPECT_EQ(a.c, b.c);
  EXPECT_EQ(a.lipschitz, b.lipschitz);
  const RazakElement c = gen_random(kSmall, 8, true);
  EXPECT_NE(a.c, c.c);
}

TEST(GenRandom, FullSpectrumCoverage) {
  const RazakParams p{2, 2, 128, 0.125};
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const RazakElement e = gen_random(p, seed, true);
    // Independent scan: sorted eigenvalue curves through the inertia oracle.
    std::vector<std::vector<double>> spectra;
    for (const auto& s : e.samples) spectra.push_back(oracle::eigenvalues(s.matrix()));
    double top = 0.0;
    std::vector<std::pair<double, double>> pieces;
    for (std::size_t j = 0; j < spectra.size(); ++j) {
      top = std::max(top, spectra[j].back());
      if (j + 1 < spectra.size())
        for (std::size_t i = 0; i < spectra[j].size(); ++i)
          pieces.emplace_back(std::min(spectra[j][i], spectra[j + 1][i]), std::max(spectra[j][i], spectra[j + 1][i]));
    }
    std::sort(pieces.begin(), pieces.end());
    double reach = 0.0, gap = 0.0;
    for (const auto& [lo, hi] : pieces) {
      gap = std::max(gap, lo - reach);
      reach = std::max(reach, hi);
    }
    gap = std::max(gap, 1.0 - reach);
    EXPECT_GE(top, 1.0 - 2.0 / 128.0);
    EXPECT_LE(gap, 1.0 / 128.0);
    EXPECT_TRUE(has_full_spectrum(e));
  }
}

TEST(GenRandom, FiberConsistencyAtEndpoints) {
  const RazakElement e = gen_random({3, 2, 32, 0.125}, 5, false);
  const auto core = eigenvalues(e.c);
  // c + 0 at the left end, c + c at the right end.
  std::vector<double> at0(3, 0.0), at1 = core;
  at0.insert(at0.end(), core.begin(), core.end());
  at1.insert(at1.end(), core.begin(), core.end());
  std::sort(at0.begin(), at0.end());
  std::sort(at1.begin(), at1.end());
  const auto f0 = oracle::eigenvalues(e.samples.front().matrix()), f1 = oracle::eigenvalues(e.samples.back().matrix());
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(f0[i], at0[i], 1e-10);
    EXPECT_NEAR(f1[i], at1[i], 1e-10);
  }
}

TEST(Norms, Basics) {
  const RazakElement z = make_element(kSmall, Hermitian::zero(2), [](double) { return Hermitian::zero(4); });
  EXPECT_EQ(sup_norm(z), 0.0);
  const RazakElement a = gen_random(kSmall, 3, false);
  EXPECT_EQ(dist_norm(a, a), 0.0);
}

TEST(Norms, DistNormMatchesScan) {
  const RazakElement a = gen_random(kSmall, 4, false);
  Rng rng(103);
  const Hermitian k = random_positive_contraction(rng, 4);
  RazakElement b = a;
  for (std::size_t j = kSmall.flat_last() + 1; j < kSmall.flat_first_right(); ++j)
    b.samples[j] = b.samples[j] + (0.1 * std::sin(std::numbers::pi * kSmall.x(j))) * k;
  double scan = 0.0;
  for (std::size_t j = 0; j <= kSmall.grid; ++j)
    scan = std::max(scan, oracle::spectral_norm((a.samples[j] - b.samples[j]).matrix()));
  EXPECT_NEAR(dist_norm(a, b), scan, 1e-9);
}

TEST(Norms, ParamsMismatch) {
  const RazakElement a = gen_random(kSmall, 3, false);
  const RazakElement b = gen_random({2, 2, 64, 0.125}, 3, false);
  EXPECT_THROW(dist_norm(a, b), ParamsMismatch);
  EXPECT_THROW(d_w_path(a, b), ParamsMismatch);
}

TEST(DWPath, Examples) {
  const RazakElement a = gen_random(kSmall, 5, true);
  EXPECT_EQ(d_w_path(a, a), 0.0);
  Rng rng(104);
  const Hermitian x = random_positive_contraction(rng, 4), y = random_positive_contraction(rng, 4);
  const RazakElement cx = sampled(kSmall, [&](double) { return x; });
  const RazakElement cy = sampled(kSmall, [&](double) { return y; });
  EXPECT_NEAR(d_w_path(cx, cy), d_w_matrix(x, y), 1e-15);
}

TEST(DWPath, MatchesPerSampleScan) {
  const RazakElement a = gen_random(kSmall, 6, false), b = gen_random(kSmall, 7, false);
  double scan = 0.0;
  for (std::size_t j = 0; j <= kSmall.grid; ++j)
    scan = std::max(scan, oracle::cuntz_scan(oracle::eigenvalues(a.samples[j].matrix()),
                                             oracle::eigenvalues(b.samples[j].matrix())));
  EXPECT_NEAR(d_w_path(a, b), scan, 1e-9);
}

TEST(DWPath, PseudometricAndLowerBound) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const RazakElement a = gen_random(kSmall, 20 + 3 * s, false);
    const RazakElement b = gen_random(kSmall, 21 + 3 * s, false);
    const RazakElement c = gen_random(kSmall, 22 + 3 * s, false);
    EXPECT_EQ(d_w_path(a, b), d_w_path(b, a));
    EXPECT_LE(d_w_path(a, c), d_w_path(a, b) + d_w_path(b, c) + 1e-9);
    EXPECT_LE(d_w_path(a, b), dist_norm(a, b) + 1e-9);
    const UnitizedUnitaryPath w = gen_random_unitary_path(kSmall, 40 + s);
    EXPECT_LE(d_w_path(a, b), unitary_error(a, b, w) + 1e-9);
  }
}

TEST(DWPath, UnitaryInvariance) {
  const RazakElement a = gen_random(kSmall, 30, true), b = gen_random(kSmall, 31, true);
  const UnitizedUnitaryPath w = gen_random_unitary_path(kSmall, 32);
  EXPECT_NEAR(d_w_path(conjugate(a, w), conjugate(b, w)), d_w_path(a, b), 1e-9);
}

TEST(DPPath, Examples) {
  const RazakElement a = gen_random(kSmall, 33, true);
  EXPECT_EQ(d_p_path(a, a), 0.0);
  Rng rng(105);
  const Hermitian x = random_positive_contraction(rng, 4, 0.05), y = random_positive_contraction(rng, 4, 0.05);
  const RazakElement cx = sampled(kSmall, [&](double) { return x; });
  const RazakElement cy = sampled(kSmall, [&](double) { return y; });
  EXPECT_NEAR(d_p_path(cx, cy), d_p_matrix(x, y), 1e-15);
}

TEST(DPPath, ChainOnFullSpectrumPairs) {
  for (std::uint64_t s = 0; s < 4; ++s) {
    const RazakElement a = gen_random(kSmall, 50 + 2 * s, true), b = gen_random(kSmall, 51 + 2 * s, true);
    const double dw = d_w_path(a, b), dp = d_p_path(a, b);
    EXPECT_LE(dw, dp + 1e-9);
    EXPECT_LE(dp, dist_norm(a, b) + 1e-9);
    // Endpoint traces alone give a lower bound on the grid value.
    EXPECT_LE(d_p_path(a, b, {0, kSmall.grid}), dp);
  }
}

TEST(DPPath, TraceGridAndFiberMeasure) {
  EXPECT_EQ(trace_grid(kSmall, 5).back(), kSmall.grid);
  EXPECT_EQ(trace_grid(kSmall).size(), kSmall.grid + 1);
  EXPECT_THROW(trace_grid(kSmall, 0), InvalidParams);
  const RazakElement a = gen_random(kSmall, 34, false);
  EXPECT_THROW(fiber_measure(a, TraceSpec::at(0.01)), InvalidParams);
  EXPECT_THROW(fiber_measure(a, TraceSpec::matrix()), InvalidParams);
  EXPECT_NEAR(fiber_measure(a, TraceSpec::at(0.0)).total_mass(), numerical_rank(a.samples[0]), 1e-12);
}

TEST(Conjugate, IdentityPath) {
  const RazakElement a = gen_random(kSmall, 35, false), b = gen_random(kSmall, 36, false);
  const UnitizedUnitaryPath one = identity_path(kSmall);
  const RazakElement c = conjugate(a, one);
  for (std::size_t j = 0; j < a.samples.size(); ++j) EXPECT_LE(op_norm(c.samples[j] - a.samples[j]), 1e-15);
  EXPECT_EQ(unitary_error(a, b, one), dist_norm(a, b));
}

TEST(Conjugate, ScalarPathLeavesErrorUnchanged) {
  const RazakElement a = gen_random(kSmall, 37, false), b = gen_random(kSmall, 38, false);
  UnitizedUnitaryPath w = identity_path(kSmall);
  // e^{i phi(x)} times the identity, equal to 1 at both ends.
  for (std::size_t j = 0; j <= kSmall.grid; ++j)
    w.samples[j] = Unitary(unchecked, std::polar(1.0, std::sin(std::numbers::pi * kSmall.x(j))) * Matrix::identity(4));
  EXPECT_NEAR(unitary_error(a, b, w), dist_norm(a, b), 1e-12);
}

TEST(Conjugate, PreservesBoundaryStructure) {
  const RazakElement a = gen_random(kSmall, 39, true);
  const UnitizedUnitaryPath w = gen_random_unitary_path(kSmall, 40);
  EXPECT_LE(membership_defect(w), 1e-12);
  const auto rep = validate(conjugate(a, w));
  EXPECT_TRUE(rep.passed()) << (rep.failures.empty() ? "" : rep.failures.front());
}

TEST(Conjugate, RejectsNonMember) {
  const RazakElement a = gen_random(kSmall, 41, false);
  UnitizedUnitaryPath w = identity_path(kSmall);
  Matrix flip = Matrix::identity(4);
  flip(3, 3) = -1.0;  // acts on the zero block at x = 0
  w.samples.front() = Unitary(flip);
  EXPECT_THROW(conjugate(a, w), MembershipViolation);
  EXPECT_THROW(unitary_error(a, a, w), MembershipViolation);
}

TEST(Refine, KeepsEndpointsAndLipschitz) {
  const RazakElement a = gen_random(kSmall, 42, false);
  const RazakElement r = refine(a, 2);
  EXPECT_EQ(r.params.grid, 4 * kSmall.grid);
  EXPECT_EQ(r.samples.front(), a.samples.front());
  EXPECT_EQ(r.samples.back(), a.samples.back());
  EXPECT_EQ(r.samples[8], a.samples[2]);
  EXPECT_TRUE(validate(r).passed());
  EXPECT_LE(measured_lipschitz(r.samples, r.params.grid), a.lipschitz + 1e-9);
}

TEST(EigenvalueCsv, OneRowPerGridPoint) {
  const RazakElement a = gen_random(kSmall, 43, false);
  std::istringstream in(eigenvalue_csv(a));
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "j,x,lambda0,lambda1,lambda2,lambda3");
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, kSmall.grid + 1);
}
