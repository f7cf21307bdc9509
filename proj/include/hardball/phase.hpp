#pragma once

#include "hardball/system.hpp"
#include "hardball/types.hpp"

namespace hardball {

// A point of the phase space: positions on the torus (each coordinate in
// [0,1)) and compound velocity.  Plain data; validation is explicit so that
// non-normalized systems (arbitrary energy / nonzero momentum) can be flowed
// with the same machinery.
struct PhasePoint {
  BallArray q;  // dim x N, entries in [0,1)
  BallArray v;  // dim x N
};

// Representative of x in [0,1) per coordinate.
Real wrap_unit(Real x);
BallArray wrap_positions(BallArray q);

// Representative of a - b with every component in [-1/2, 1/2); -1/2 is
// included, +1/2 excluded.  |result| is the torus distance.
Real min_image_component(Real d);
Vec min_image_delta(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b);

// Minimum-image separation q_i - q_j for a pair of a configuration.
Vec pair_delta(const BallArray& q, BallPair pair);
Real pair_distance(const BallArray& q, BallPair pair);

Real kinetic_energy(const SystemParams& p, const PhasePoint& x);
Vec total_momentum(const SystemParams& p, const PhasePoint& x);

// Smallest minimum-image pair distance of the configuration.
Real min_pair_distance(const SystemParams& p, const BallArray& q);

// True when every pair keeps distance >= 2r - contact_tol.
bool admissible(const SystemParams& p, const BallArray& q);

// Shifts the velocities to zero total momentum and rescales to kinetic
// energy 1/2.  Throws ZeroEnergy when all raw velocities coincide and
// InadmissibleConfiguration when a pair overlaps.
PhasePoint normalize_state(const SystemParams& p, const BallArray& q,
                           const BallArray& v_raw);

// (q, v) -> (q, -v).  Exact involution.
PhasePoint time_reverse(const PhasePoint& x);

// Validates admissibility and, when requested, the standard normalizations
// I = 0 and E = 1/2 within conservation_tol.
void check_phase_point(const SystemParams& p, const PhasePoint& x,
                       bool require_normalized = true);

}  // namespace hardball
