#include "hardball/phase.hpp"

#include "hardball/errors.hpp"

#include <cmath>

namespace hardball {

Real wrap_unit(Real x) {
  Real w = x - std::floor(x);
  return w < 1.0 ? w : 0.0;  // floor rounding can land exactly on 1
}

BallArray wrap_positions(BallArray q) {
  return q.unaryExpr([](Real x) { return wrap_unit(x); });
}

Real min_image_component(Real d) {
  // d - floor(d + 1/2) maps to [-1/2, 1/2): -1/2 included, +1/2 wraps down.
  return d - std::floor(d + 0.5);
}

Vec min_image_delta(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) {
  return (a - b).unaryExpr([](Real d) { return min_image_component(d); });
}

Vec pair_delta(const BallArray& q, BallPair pair) {
  return min_image_delta(q.col(pair.i), q.col(pair.j));
}

Real pair_distance(const BallArray& q, BallPair pair) {
  return pair_delta(q, pair).norm();
}

Real kinetic_energy(const SystemParams& p, const PhasePoint& x) {
  return 0.5 * mass_inner(p, x.v, x.v);
}

Vec total_momentum(const SystemParams& p, const PhasePoint& x) {
  return x.v * p.masses;
}

Real min_pair_distance(const SystemParams& p, const BallArray& q) {
  Real best = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < p.ball_count; ++i)
    for (int j = i + 1; j < p.ball_count; ++j)
      best = std::min(best, pair_distance(q, BallPair{i, j}));
  return best;
}

bool admissible(const SystemParams& p, const BallArray& q) {
  return min_pair_distance(p, q) >= 2 * p.radius - p.tol.contact_tol;
}

PhasePoint normalize_state(const SystemParams& p, const BallArray& q,
                           const BallArray& v_raw) {
  if (q.rows() != p.dim || q.cols() != p.ball_count || v_raw.rows() != p.dim ||
      v_raw.cols() != p.ball_count)
    throw ContractViolation("normalize_state: wrong shape");
  BallArray qw = wrap_positions(q);
  if (!admissible(p, qw))
    throw InadmissibleConfiguration("normalize_state: overlapping pair");

  Vec drift = (v_raw * p.masses) / p.total_mass;
  BallArray shifted = v_raw.colwise() - drift;
  Real twice_energy = mass_inner(p, shifted, shifted);
  if (twice_energy <= 0 || !std::isfinite(twice_energy) ||
      std::sqrt(twice_energy) <= 1e-15 * (1 + v_raw.norm()))
    throw ZeroEnergy("normalize_state: all velocities equal, nothing to scale");

  PhasePoint x{std::move(qw), shifted / std::sqrt(twice_energy)};
  return x;
}

PhasePoint time_reverse(const PhasePoint& x) { return {x.q, -x.v}; }

void check_phase_point(const SystemParams& p, const PhasePoint& x,
                       bool require_normalized) {
  if (x.q.rows() != p.dim || x.q.cols() != p.ball_count || x.v.rows() != p.dim ||
      x.v.cols() != p.ball_count)
    throw ContractViolation("phase point has wrong shape");
  if (!x.q.allFinite() || !x.v.allFinite())
    throw ContractViolation("phase point has non-finite entries");
  if (!admissible(p, x.q))
    throw InadmissibleConfiguration("phase point lies inside a forbidden cylinder");
  if (require_normalized) {
    if (total_momentum(p, x).norm() > p.tol.conservation_tol)
      throw ContractViolation("phase point violates the zero-momentum reduction");
    if (std::abs(kinetic_energy(p, x) - 0.5) > p.tol.conservation_tol)
      throw ContractViolation("phase point violates the unit-energy normalization");
  }
}

}  // namespace hardball
