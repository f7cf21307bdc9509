#pragma once

#include "hardball/phase.hpp"
#include "hardball/system.hpp"
#include "hardball/types.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace hardball {

// One recorded collision.  `normal` is the minimum-image unit vector from
// ball j towards ball i at contact; `cos_phi` is the cosine of the angle
// between the outgoing relative velocity and that outward normal.
struct CollisionEvent {
  Real t = 0;          // absolute event time within the segment
  Real dt_flight = 0;  // free-flight duration since the previous event
  BallPair pair;
  Real rel_speed = 0;  // |v_i - v_j| at impact (equal on both sides)
  Real cos_phi = 0;
  Vec normal;          // dim entries, unit length
};

struct TrajectorySegment {
  PhasePoint x0;
  Real t_end = 0;
  std::vector<CollisionEvent> events;
  Real final_flight_dt = 0;  // flight from the last event to x_end
  PhasePoint x_end;
};

// Stop after `time` units or after `collisions` events, whichever comes
// first.  At least one bound must be set.
struct StopRule {
  std::optional<Real> time;
  std::optional<long> collisions;

  static StopRule at_time(Real t) { return {t, std::nullopt}; }
  static StopRule after_collisions(long n) { return {std::nullopt, n}; }
};

struct FlowOptions {
  Real horizon = 10.0;        // initial collision-search window, doubled as needed
  Real max_flight = 1e6;      // give up if no event occurs within this time
  long flood_count = 1000;    // flood guard: this many events ...
  Real flood_scale = 10.0;    // ... within flood_count*singular_gap*flood_scale
};

struct Contact {
  Real dt = 0;
  BallPair pair;
  Vec normal;
  Real rel_speed = 0;
  Real cos_phi = 0;
};

// Earliest future contact of any pair within (0, horizon], scanning lattice
// images on the torus.  Returns nullopt when no pair meets within `horizon`.
// Throws SingularOrbit when two distinct pairs reach contact within
// singular_gap of each other, or when the earliest impact is grazing
// (cos_phi below grazing_cos).
std::optional<Contact> next_collision(const SystemParams& p, const PhasePoint& x,
                                      Real horizon);

// Free flight: q <- q + dt v (mod 1), v unchanged.  Throws ContractViolation
// when the advanced configuration is inadmissible (a collision was skipped).
PhasePoint advance_free(const SystemParams& p, const PhasePoint& x, Real dt);

// Elastic collision of `pair` at contact, classical momentum-exchange form:
// only the components along `normal` change; energy and momentum are
// conserved exactly.  Throws NotInContact / Receding.
PhasePoint resolve_collision(const SystemParams& p, const PhasePoint& x,
                             BallPair pair, const Vec& normal);

// Same collision as the orthogonal reflection across the boundary's tangent
// hyperplane in the mass metric: v+ = v - 2 <v,n> n with n the unit compound
// normal.  Kept as an independent route for cross-checking resolve_collision.
BallArray reflect_velocities(const SystemParams& p, const BallArray& v,
                             BallPair pair, const Vec& normal);

// Compound-space unit inner normal of the boundary cylinder of `pair`
// (mass metric), supported on the pair's two columns.
BallArray cylinder_normal(const SystemParams& p, BallPair pair, const Vec& normal);

// Event-driven flow: alternates next_collision / advance_free /
// resolve_collision until the stop rule is met.  Energy and momentum are
// checked against their initial values after every event.
TrajectorySegment simulate(const SystemParams& p, const PhasePoint& x0,
                           StopRule stop, const FlowOptions& opts = {});

// Replays a recorded segment through the same flight/collision arithmetic,
// invoking the callbacks; used by the tangent propagation.  `on_flight`
// receives the state at the start of each flight leg and its duration;
// `on_event` receives the pre-collision state at contact.
void replay_segment(
    const SystemParams& p, const TrajectorySegment& seg,
    const std::function<void(const PhasePoint&, Real)>& on_flight,
    const std::function<void(const PhasePoint&, const CollisionEvent&)>& on_event);

// Exact mirror of a segment under time reversal: the returned segment flows
// time_reverse(seg.x_end) into time_reverse(seg.x0) through the same
// contacts in opposite order.
TrajectorySegment reverse_segment(const SystemParams& p,
                                  const TrajectorySegment& seg);

// Truncates a segment to the prefix [0, t_cut]; t_cut must not split an
// event (it may coincide with one, which is then kept).
TrajectorySegment truncate_segment(const SystemParams& p,
                                   const TrajectorySegment& seg, Real t_cut);

// Event log export/import: CSV columns t,i,j,rel_speed,cos_phi with 1-based
// ball labels and 18 significant digits.
void write_events_csv(std::ostream& os, const TrajectorySegment& seg);

}  // namespace hardball
