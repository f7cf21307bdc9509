#pragma once

#include "hardball/flow.hpp"
#include "hardball/system.hpp"
#include "hardball/tangent.hpp"
#include "hardball/types.hpp"

#include <vector>

namespace hardball {

// Value-level multiset of masses; the computable bounds below depend only on
// this, not on ball labels.
struct MassMultiset {
  std::vector<Real> masses;  // sorted ascending
  Real total = 0;
  Real min = 0;

  static MassMultiset of(const Vec& masses);
  static MassMultiset of(std::vector<Real> masses);
};

// Envelope kept by all relative speeds for all time, given that every
// pairwise relative speed is at most `a` at one instant: 2 a sqrt(M/m_min).
Real max_relative_speed_bound(Real a, const MassMultiset& ms);

// Recursive bound: if every collision of a segment with a connected
// collision graph has relative speed <= a, then every relative velocity at
// every time is bounded by this value.  Defined inductively over two-class
// partitions of the ball set; homogeneous of degree one in `a`.
Real connected_orbit_speed_bound(Real a, const MassMultiset& ms);

// connected_orbit_speed_bound(1, ms); the bound equals a times this.
Real speed_bound_coefficient(const MassMultiset& ms);

// Threshold G > 0 such that every normalized orbit segment with a connected
// collision graph must contain a collision with relative speed >= G.
// Closed form via homogeneity: G = 0.99 * total^{-1/2} / f(1), which keeps
// connected_orbit_speed_bound(G) <= 0.99 * total^{-1/2}.
Real fast_collision_threshold(const MassMultiset& ms);

// Same threshold obtained by bisection on the monotone bound; cross-check
// path for the closed form.
Real fast_collision_threshold_bisect(const MassMultiset& ms);

// Guaranteed lower bound rel_speed / r on the post-collision curvature
// <dq+,dv+>/|dq|^2 of an in-plane flat seed planted at the recorded event.
Real curvature_lower_bound(const CollisionEvent& ev, const SystemParams& p);

struct LinearExpansionReport {
  Real c0 = 0;         // curvature hypothesis actually used
  Real min_slack = 0;  // min over samples of |dq_t|/|dq_0| - (1 + c0 t)
  long samples = 0;
  long violations = 0;  // samples with slack < -1e-8
};

// Checks |dq_t|/|dq_0| >= 1 + c0 t - 1e-8 at every sample of a tangent
// trace whose first sample satisfies the curvature hypothesis
// <dq,dv>/|dq|^2 >= c0 > 0 (else HypothesisUnmet).  Times are measured from
// the first sample.
LinearExpansionReport check_linear_expansion(const std::vector<TangentSample>& trace,
                                             Real c0);

}  // namespace hardball
