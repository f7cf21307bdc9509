#include "hardball/flow.hpp"

#include "hardball/errors.hpp"
#include "hardball/io.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <vector>

namespace hardball {

namespace {

struct PairHit {
  Real dt;
  BallPair pair;
};

// Earliest entering root of || dq0 + t dv - k ||^2 = (2r)^2 over lattice
// offsets k, restricted to [0, horizon].  dq0 is the minimum-image separation
// at flight start, so only images reachable by the swept slab matter; the
// scan walks sub-windows short enough that each coordinate meets at most a
// couple of candidate offsets.  Roots within contact_tol of zero count as
// immediate: a time-reversed post-collision state starts exactly at contact
// with the pair approaching.  A receding pair at contact (the state right
// after a resolution) has no entering root and is never re-detected.
std::optional<Real> earliest_pair_contact(const Vec& dq0, const Vec& dv,
                                          Real two_r, Real horizon,
                                          Real contact_tol) {
  const int nu = static_cast<int>(dq0.size());
  const Real a = dv.squaredNorm();
  if (a == 0) return std::nullopt;

  const Real max_component_speed = dv.cwiseAbs().maxCoeff();
  const Real step =
      max_component_speed > 0 ? 0.5 / max_component_speed : horizon;

  std::vector<int> klo(nu), khi(nu), k(nu);
  Real t0 = 0;
  while (t0 < horizon) {
    const Real t1 = std::min(horizon, t0 + step);
    bool empty = false;
    for (int c = 0; c < nu; ++c) {
      const Real p0 = dq0[c] + t0 * dv[c];
      const Real p1 = dq0[c] + t1 * dv[c];
      klo[c] = static_cast<int>(std::ceil(std::min(p0, p1) - two_r));
      khi[c] = static_cast<int>(std::floor(std::max(p0, p1) + two_r));
      if (klo[c] > khi[c]) empty = true;
      k[c] = klo[c];
    }
    if (empty) {  // no lattice image reachable in this window
      t0 = t1;
      continue;
    }

    Real best = std::numeric_limits<Real>::infinity();
    while (true) {
      // quadratic in t for the current image
      Real b = 0, c_coef = -two_r * two_r;
      for (int c = 0; c < nu; ++c) {
        const Real pc = dq0[c] - k[c];
        b += 2 * pc * dv[c];
        c_coef += pc * pc;
      }
      if (b < 0) {  // approaching this image somewhere ahead
        const Real disc = b * b - 4 * a * c_coef;
        if (disc >= 0) {
          Real t = 2 * c_coef / (-b + std::sqrt(disc));  // entering root
          // one Newton step on the exact distance function; skipped near
          // tangency where the derivative degenerates
          const Real f = a * t * t + b * t + c_coef;
          const Real fp = 2 * a * t + b;
          const Real corr = f / fp;
          if (std::isfinite(corr) && std::abs(corr) < 1e-6) t -= corr;
          if (t > -contact_tol && t >= t0 - 1e-15 && t <= t1) {
            t = std::max<Real>(t, 0);
            if (t < best) best = t;
          }
        }
      }
      // advance the mixed-radix image counter
      int c = 0;
      while (c < nu) {
        if (++k[c] <= khi[c]) break;
        k[c] = klo[c];
        ++c;
      }
      if (c == nu) break;
    }
    if (best < std::numeric_limits<Real>::infinity()) return best;
    t0 = t1;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Contact> next_collision(const SystemParams& p, const PhasePoint& x,
                                      Real horizon) {
  if (!(horizon > 0)) return std::nullopt;
  const Real two_r = 2 * p.radius;

  std::vector<PairHit> hits;
  for (int i = 0; i < p.ball_count; ++i) {
    for (int j = i + 1; j < p.ball_count; ++j) {
      const BallPair pair{i, j};
      Vec dq0 = pair_delta(x.q, pair);
      Vec dv = x.v.col(i) - x.v.col(j);
      if (auto dt = earliest_pair_contact(dq0, dv, two_r, horizon,
                                          p.tol.contact_tol))
        hits.push_back({*dt, pair});
    }
  }
  if (hits.empty()) return std::nullopt;

  auto best = std::min_element(hits.begin(), hits.end(),
                               [](const PairHit& a, const PairHit& b) {
                                 return a.dt < b.dt;
                               });
  for (const PairHit& h : hits) {
    if (!(h.pair == best->pair) && h.dt - best->dt < p.tol.singular_gap)
      throw SingularOrbit("two distinct collisions within singular_gap");
  }

  Contact c;
  c.dt = best->dt;
  c.pair = best->pair;
  Vec qi = x.q.col(c.pair.i) + c.dt * x.v.col(c.pair.i);
  Vec qj = x.q.col(c.pair.j) + c.dt * x.v.col(c.pair.j);
  Vec delta = min_image_delta(qi, qj);
  c.normal = delta / delta.norm();
  Vec dv = x.v.col(c.pair.i) - x.v.col(c.pair.j);
  c.rel_speed = dv.norm();
  c.cos_phi = -c.normal.dot(dv) / c.rel_speed;
  if (c.cos_phi < p.tol.grazing_cos)
    throw SingularOrbit("grazing collision: cos(phi) below grazing_cos");
  return c;
}

PhasePoint advance_free(const SystemParams& p, const PhasePoint& x, Real dt) {
  PhasePoint y{wrap_positions(x.q + dt * x.v), x.v};
  if (!admissible(p, y.q))
    throw ContractViolation("advance_free skipped a collision");
  return y;
}

BallArray cylinder_normal(const SystemParams& p, BallPair pair, const Vec& normal) {
  const Real mi = p.masses[pair.i], mj = p.masses[pair.j];
  const Real mu = mi * mj / (mi + mj);  // reduced mass
  BallArray n = BallArray::Zero(p.dim, p.ball_count);
  n.col(pair.i) = std::sqrt(mu) / mi * normal;
  n.col(pair.j) = -std::sqrt(mu) / mj * normal;
  return n;
}

PhasePoint resolve_collision(const SystemParams& p, const PhasePoint& x,
                             BallPair pair, const Vec& normal) {
  const Real dist = pair_distance(x.q, pair);
  if (std::abs(dist - 2 * p.radius) > 1e-8)
    throw NotInContact("resolve_collision: pair is not at contact distance");
  Vec dv = x.v.col(pair.i) - x.v.col(pair.j);
  const Real closing = dv.dot(normal);
  if (closing >= 0) throw Receding("resolve_collision: pair is not approaching");

  const Real mi = p.masses[pair.i], mj = p.masses[pair.j];
  const Real impulse = 2 * (mi * mj / (mi + mj)) * closing;
  PhasePoint y = x;
  y.v.col(pair.i) -= (impulse / mi) * normal;
  y.v.col(pair.j) += (impulse / mj) * normal;
  return y;
}

BallArray reflect_velocities(const SystemParams& p, const BallArray& v,
                             BallPair pair, const Vec& normal) {
  BallArray n = cylinder_normal(p, pair, normal);
  return v - 2 * mass_inner(p, v, n) * n;
}

TrajectorySegment simulate(const SystemParams& p, const PhasePoint& x0,
                           StopRule stop, const FlowOptions& opts) {
  if (!stop.time && !stop.collisions)
    throw ContractViolation("simulate: stop rule has no bound");
  if (!admissible(p, x0.q))
    throw InadmissibleConfiguration("simulate: initial configuration overlaps");

  const Real e0 = kinetic_energy(p, {x0.q, x0.v});
  const Vec i0 = x0.v * p.masses;
  const Real flood_window =
      static_cast<Real>(opts.flood_count) * p.tol.singular_gap * opts.flood_scale;

  TrajectorySegment seg;
  seg.x0 = x0;
  PhasePoint x = x0;
  Real t = 0;
  std::deque<Real> recent;

  while (true) {
    if (stop.collisions &&
        static_cast<long>(seg.events.size()) >= *stop.collisions) {
      seg.final_flight_dt = 0;
      break;
    }

    Real remaining = std::numeric_limits<Real>::infinity();
    if (stop.time) remaining = *stop.time - t;
    if (stop.time && remaining <= 0) {
      seg.final_flight_dt = 0;
      break;
    }

    // grow the search window until an event is found or the remaining time
    // (or the hard flight cap) is exhausted
    std::optional<Contact> c;
    Real horizon = std::min(opts.horizon, remaining);
    while (true) {
      c = next_collision(p, x, horizon);
      if (c || horizon >= remaining) break;
      if (horizon >= opts.max_flight)
        throw Error("simulate: no collision within the flight cap");
      horizon = std::min({horizon * 2, remaining, opts.max_flight});
    }

    if (!c) {
      seg.final_flight_dt = remaining;
      x = advance_free(p, x, remaining);
      t = *stop.time;
      break;
    }

    x = advance_free(p, x, c->dt);
    t += c->dt;

    if (!seg.events.empty() && t - seg.events.back().t < p.tol.singular_gap)
      throw SingularOrbit("consecutive events closer than singular_gap");

    recent.push_back(t);
    if (static_cast<long>(recent.size()) > opts.flood_count) recent.pop_front();
    if (static_cast<long>(recent.size()) == opts.flood_count &&
        t - recent.front() < flood_window)
      throw CollisionFlood("collision accumulation guard tripped");

    x = resolve_collision(p, x, c->pair, c->normal);

    CollisionEvent ev;
    ev.t = t;
    ev.dt_flight = c->dt;
    ev.pair = c->pair;
    ev.rel_speed = c->rel_speed;
    ev.cos_phi = c->cos_phi;
    ev.normal = c->normal;
    seg.events.push_back(std::move(ev));

    const Real e = kinetic_energy(p, x);
    if (std::abs(e - e0) > p.tol.conservation_tol * std::max<Real>(1, std::abs(e0)))
      throw ContractViolation("simulate: kinetic energy drifted beyond tolerance");
    if (((x.v * p.masses) - i0).norm() >
        p.tol.conservation_tol * std::max<Real>(1, i0.norm()))
      throw ContractViolation("simulate: total momentum drifted beyond tolerance");
  }

  seg.t_end = stop.time && seg.final_flight_dt > 0
                  ? *stop.time
                  : (seg.events.empty() ? 0 : seg.events.back().t);
  seg.x_end = x;
  return seg;
}

void replay_segment(
    const SystemParams& p, const TrajectorySegment& seg,
    const std::function<void(const PhasePoint&, Real)>& on_flight,
    const std::function<void(const PhasePoint&, const CollisionEvent&)>& on_event) {
  PhasePoint x = seg.x0;
  for (const CollisionEvent& ev : seg.events) {
    if (on_flight) on_flight(x, ev.dt_flight);
    x = advance_free(p, x, ev.dt_flight);
    if (on_event) on_event(x, ev);
    x = resolve_collision(p, x, ev.pair, ev.normal);
  }
  if (on_flight) on_flight(x, seg.final_flight_dt);
}

TrajectorySegment reverse_segment(const SystemParams&,
                                  const TrajectorySegment& seg) {
  TrajectorySegment rev;
  rev.x0 = time_reverse(seg.x_end);
  rev.x_end = time_reverse(seg.x0);
  rev.t_end = seg.t_end;

  const auto n = seg.events.size();
  rev.events.reserve(n);
  Real t = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const CollisionEvent& fwd = seg.events[n - 1 - m];
    CollisionEvent ev;
    ev.dt_flight =
        m == 0 ? seg.final_flight_dt : seg.events[n - m].dt_flight;
    t += ev.dt_flight;
    ev.t = t;
    ev.pair = fwd.pair;
    ev.rel_speed = fwd.rel_speed;
    ev.cos_phi = fwd.cos_phi;
    ev.normal = fwd.normal;
    rev.events.push_back(std::move(ev));
  }
  rev.final_flight_dt = n == 0 ? seg.final_flight_dt : seg.events.front().dt_flight;
  return rev;
}

TrajectorySegment truncate_segment(const SystemParams& p,
                                   const TrajectorySegment& seg, Real t_cut) {
  if (t_cut < 0 || t_cut > seg.t_end)
    throw ContractViolation("truncate_segment: cut time outside segment");
  TrajectorySegment out;
  out.x0 = seg.x0;
  out.t_end = t_cut;
  Real t_last = 0;
  for (const CollisionEvent& ev : seg.events) {
    if (ev.t > t_cut) break;
    out.events.push_back(ev);
    t_last = ev.t;
  }
  out.final_flight_dt = t_cut - t_last;
  PhasePoint x = out.x0;
  for (const CollisionEvent& ev : out.events) {
    x = advance_free(p, x, ev.dt_flight);
    x = resolve_collision(p, x, ev.pair, ev.normal);
  }
  x = advance_free(p, x, out.final_flight_dt);
  out.x_end = std::move(x);
  return out;
}

void write_events_csv(std::ostream& os, const TrajectorySegment& seg) {
  os << "t,i,j,rel_speed,cos_phi\n";
  for (const CollisionEvent& ev : seg.events) {
    os << fmt_real(ev.t) << ',' << ev.pair.i + 1 << ',' << ev.pair.j + 1 << ','
       << fmt_real(ev.rel_speed) << ',' << fmt_real(ev.cos_phi) << '\n';
  }
}

}  // namespace hardball
