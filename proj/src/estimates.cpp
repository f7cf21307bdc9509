#include "hardball/estimates.hpp"

#include "hardball/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace hardball {

MassMultiset MassMultiset::of(const Vec& masses) {
  return of(std::vector<Real>(masses.data(), masses.data() + masses.size()));
}

MassMultiset MassMultiset::of(std::vector<Real> masses) {
  if (masses.empty())
    throw ContractViolation("MassMultiset: empty mass list");
  for (Real m : masses)
    if (!(m > 0)) throw ContractViolation("MassMultiset: masses must be positive");
  std::sort(masses.begin(), masses.end());
  MassMultiset ms;
  ms.total = 0;
  for (Real m : masses) ms.total += m;
  ms.min = masses.front();
  ms.masses = std::move(masses);
  return ms;
}

Real max_relative_speed_bound(Real a, const MassMultiset& ms) {
  if (a < 0) throw ContractViolation("max_relative_speed_bound: a must be >= 0");
  return 2 * a * std::sqrt(ms.total / ms.min);
}

namespace {

// Unit-rate coefficient of the recursive bound, memoized on sorted mass
// multisets.  The recursion enumerates all two-class partitions of the ball
// set; that is exponential in N, fine at desk scale (N <= ~12) and exactly
// the inductive construction the bound comes from.
Real unit_bound(const std::vector<Real>& sorted_masses) {
  static std::map<std::vector<Real>, Real> memo;
  static std::mutex mutex;
  {
    std::scoped_lock lock(mutex);
    if (auto it = memo.find(sorted_masses); it != memo.end()) return it->second;
  }

  const std::size_t n = sorted_masses.size();
  Real value = 0;
  if (n == 1) {
    value = 0;
  } else if (n == 2) {
    value = 1;
  } else {
    Real total = 0, min = sorted_masses.front();
    for (Real m : sorted_masses) total += m;

    Real g = 0;
    // ball 0 stays in class one; the complement enumerates each unordered
    // partition exactly once
    const std::size_t splits = std::size_t{1} << (n - 1);
    for (std::size_t bits = 0; bits + 1 < splits; ++bits) {
      std::vector<Real> one{sorted_masses[0]}, two;
      for (std::size_t b = 1; b < n; ++b)
        ((bits >> (b - 1)) & 1 ? one : two).push_back(sorted_masses[b]);
      std::sort(one.begin(), one.end());
      std::sort(two.begin(), two.end());
      g = std::max(g, 1 + unit_bound(one) + unit_bound(two));
    }
    value = 2 * std::sqrt(total / min) * g;
  }

  std::scoped_lock lock(mutex);
  memo.emplace(sorted_masses, value);
  return value;
}

}  // namespace

Real speed_bound_coefficient(const MassMultiset& ms) {
  return unit_bound(ms.masses);
}

Real connected_orbit_speed_bound(Real a, const MassMultiset& ms) {
  if (a < 0) throw ContractViolation("connected_orbit_speed_bound: a must be >= 0");
  const std::size_t n = ms.masses.size();
  if (n == 1) return 0;
  if (n == 2) return a;

  Real g = 0;
  const std::size_t splits = std::size_t{1} << (n - 1);
  for (std::size_t bits = 0; bits + 1 < splits; ++bits) {
    std::vector<Real> one{ms.masses[0]}, two;
    for (std::size_t b = 1; b < n; ++b)
      ((bits >> (b - 1)) & 1 ? one : two).push_back(ms.masses[b]);
    g = std::max(g, a + connected_orbit_speed_bound(a, MassMultiset::of(one)) +
                        connected_orbit_speed_bound(a, MassMultiset::of(two)));
  }
  return 2 * std::sqrt(ms.total / ms.min) * g;
}

Real fast_collision_threshold(const MassMultiset& ms) {
  if (ms.masses.size() < 2)
    throw ContractViolation("fast_collision_threshold: need at least 2 masses");
  const Real target = 0.99 / std::sqrt(ms.total);
  return target / speed_bound_coefficient(ms);
}

Real fast_collision_threshold_bisect(const MassMultiset& ms) {
  if (ms.masses.size() < 2)
    throw ContractViolation("fast_collision_threshold: need at least 2 masses");
  const Real target = 0.99 / std::sqrt(ms.total);
  // the bound is monotone in a with value 0 at a = 0, so a bracket grows
  // until it crosses the target
  Real lo = 0, hi = 1;
  while (connected_orbit_speed_bound(hi, ms) < target) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const Real mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (connected_orbit_speed_bound(mid, ms) < target ? lo : hi) = mid;
  }
  return lo;
}

Real curvature_lower_bound(const CollisionEvent& ev, const SystemParams& p) {
  return ev.rel_speed / p.radius;
}

LinearExpansionReport check_linear_expansion(const std::vector<TangentSample>& trace,
                                             Real c0) {
  if (!(c0 > 0))
    throw HypothesisUnmet("check_linear_expansion: requires c0 > 0");
  if (trace.empty())
    throw ContractViolation("check_linear_expansion: empty trace");

  const TangentSample& first = trace.front();
  if (first.norm_dq <= 0)
    throw HypothesisUnmet("check_linear_expansion: zero dq at start");
  const Real curvature0 = first.q_value / (first.norm_dq * first.norm_dq);
  if (curvature0 < c0 * (1 - 1e-12))
    throw HypothesisUnmet("check_linear_expansion: starting curvature below c0");

  LinearExpansionReport rep;
  rep.c0 = c0;
  rep.min_slack = std::numeric_limits<Real>::infinity();
  const Real t0 = first.t;
  for (const TangentSample& s : trace) {
    // the dq-norm ratio is evaluated in log scale; it grows exponentially
    // over long traces while the bound stays polynomial
    const Real log_ratio = (s.log_scale - first.log_scale) +
                           std::log(s.norm_dq / first.norm_dq);
    const Real bound = 1 + c0 * (s.t - t0);
    const Real ratio = log_ratio < 700 ? std::exp(log_ratio)
                                       : std::numeric_limits<Real>::max();
    const Real slack = ratio - bound;
    rep.min_slack = std::min(rep.min_slack, slack);
    ++rep.samples;
    if (slack < -1e-8) ++rep.violations;
  }
  return rep;
}

}  // namespace hardball
