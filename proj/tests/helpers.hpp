#pragma once

#include <functional>

#include "orbitdist/razak.hpp"

namespace testing_helpers {

using namespace orbitdist;

// Element with core c, flat ends, and samples `inner(x)` strictly between the
// flat regions. Nothing is checked; call validate() when it matters.
inline RazakElement make_element(const RazakParams& p, const Hermitian& c,
                                 const std::function<Hermitian(double)>& inner) {
  RazakElement e{p, c, {}, 0.0};
  const Hermitian f0 = boundary_at_zero(c, p.n), f1 = boundary_at_one(c, p.n);
  for (std::size_t j = 0; j <= p.grid; ++j) {
    if (j <= p.flat_last())
      e.samples.push_back(f0);
    else if (j >= p.flat_first_right())
      e.samples.push_back(f1);
    else
      e.samples.push_back(inner(p.x(j)));
  }
  e.lipschitz = measured_lipschitz(e.samples, p.grid);
  return e;
}

// Every sample given by `f(x)`, ignoring the boundary structure.
inline RazakElement sampled(const RazakParams& p, const std::function<Hermitian(double)>& f) {
  RazakElement e{p, Hermitian::zero(p.k), {}, 0.0};
  for (std::size_t j = 0; j <= p.grid; ++j) e.samples.push_back(f(p.x(j)));
  e.lipschitz = measured_lipschitz(e.samples, p.grid);
  return e;
}

// Linear blend of the boundary values across the middle: (1 - s) f(0) + s f(1).
inline RazakElement blend_element(const RazakParams& p, const Hermitian& c) {
  const Hermitian f0 = boundary_at_zero(c, p.n), f1 = boundary_at_one(c, p.n);
  return make_element(p, c, [&](double x) {
    const double s = (x - p.gamma) / (1.0 - 2.0 * p.gamma);
    return (1.0 - s) * f0 + s * f1;
  });
}

}  // namespace testing_helpers
