#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hardball/errors.hpp"
#include "hardball/experiment.hpp"
#include "hardball/flow.hpp"
#include "hardball/graphs.hpp"
#include "hardball/random.hpp"

#include <cmath>
#include <sstream>

using namespace hardball;

namespace {

SystemParams fixture3() {
  return SystemParams::create(3, 2, 0.1, Vec::Ones(3));
}

PhasePoint two_ball_state(Real q1x, Real q2x, Real v1x, Real v2x) {
  BallArray q(2, 2), v(2, 2);
  q << q1x, q2x,
       0.5, 0.5;
  v << v1x, v2x,
       0.0, 0.0;
  return {q, v};
}

}  // namespace

TEST_CASE("head-on pair meets through the direct route") {
  // gap 0.6 through the cell interior, closing speed 2, contact at 0.2:
  // the quadratic root is (0.6 - 0.2) / 2
  SystemParams p = SystemParams::create(2, 2, 0.1, Vec::Ones(2));
  PhasePoint x = two_ball_state(0.2, 0.8, 1.0, -1.0);
  auto c = next_collision(p, x, 10.0);
  REQUIRE(c.has_value());
  CHECK(c->dt == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(c->pair == BallPair{0, 1});
  CHECK(c->rel_speed == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(c->normal.norm() - 1.0) <= 1e-12);
  CHECK(c->cos_phi == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("wrap route wins when it is the approaching one") {
  // balls moving apart through the interior collide across the seam:
  // wrapped gap 0.4, closing speed 2, contact at (0.4 - 0.2) / 2
  SystemParams p = SystemParams::create(2, 2, 0.1, Vec::Ones(2));
  PhasePoint x = two_ball_state(0.2, 0.8, -1.0, 1.0);
  auto c = next_collision(p, x, 10.0);
  REQUIRE(c.has_value());
  CHECK(c->dt == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("zero relative velocity never collides") {
  SystemParams p = SystemParams::create(2, 2, 0.1, Vec::Ones(2));
  PhasePoint x = two_ball_state(0.2, 0.8, 0.7, 0.7);
  CHECK_FALSE(next_collision(p, x, 50.0).has_value());
}

TEST_CASE("exact grazing raises SingularOrbit") {
  // impact parameter exactly 2r: tangential touch
  SystemParams p = SystemParams::create(2, 2, 0.1, Vec::Ones(2));
  BallArray q(2, 2), v(2, 2);
  q << 0.1, 0.7,
       0.3, 0.3 + 0.2;  // offset = 2r
  v << 1.0, 0.0,
       0.0, 0.0;
  PhasePoint x{q, v};
  CHECK_THROWS_AS(next_collision(p, x, 10.0), SingularOrbit);
}

TEST_CASE("near miss above 2r passes cleanly") {
  SystemParams p = SystemParams::create(2, 2, 0.1, Vec::Ones(2));
  BallArray q(2, 2), v(2, 2);
  q << 0.1, 0.7,
       0.3, 0.3 + 0.2 + 1e-7;
  v << 1.0, 0.0,
       0.0, 0.0;
  PhasePoint x{q, v};
  CHECK_FALSE(next_collision(p, x, 1.0).has_value());
}

TEST_CASE("advance_free identity, additivity, velocity untouched") {
  SystemParams p = fixture3();
  PhasePoint x = generate_state(p, 91);
  PhasePoint y = advance_free(p, x, 0.0);
  CHECK((y.q - x.q).lpNorm<Eigen::Infinity>() == 0.0);

  auto c = next_collision(p, x, 100.0);
  REQUIRE(c.has_value());
  const Real dt = 0.9 * c->dt;
  PhasePoint one = advance_free(p, x, dt);
  PhasePoint two = advance_free(p, advance_free(p, x, 0.25 * dt), 0.75 * dt);
  for (int i = 0; i < p.ball_count; ++i) {
    Vec gap = min_image_delta(one.q.col(i), two.q.col(i));
    CHECK(gap.lpNorm<Eigen::Infinity>() <= 1e-14);
  }
  CHECK((one.v - x.v).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("equal masses head-on swap velocities") {
  SystemParams p = SystemParams::create(2, 2, 0.1, Vec::Ones(2));
  BallArray q(2, 2), v(2, 2);
  q << 0.3, 0.5,
       0.5, 0.5;
  v << 1.0, -1.0,
       0.0, 0.0;
  PhasePoint x{q, v};
  Vec normal = pair_delta(x.q, {0, 1}).normalized();
  PhasePoint y = resolve_collision(p, x, {0, 1}, normal);
  CHECK(y.v(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(y.v(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("masses (1,3) head-on: classical exchange values") {
  Vec m(2);
  m << 1, 3;
  SystemParams p = SystemParams::create(2, 2, 0.1, m);
  BallArray q(2, 2), v(2, 2);
  q << 0.3, 0.5,
       0.5, 0.5;
  v << 1.0, -1.0,
       0.0, 0.0;
  PhasePoint x{q, v};
  Vec normal = pair_delta(x.q, {0, 1}).normalized();
  PhasePoint y = resolve_collision(p, x, {0, 1}, normal);
  // v1' = ((m1-m2) v1 + 2 m2 v2)/(m1+m2) = -2, v2' = ((m2-m1) v2 + 2 m1 v1)/4 = 0
  CHECK(y.v(0, 0) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(y.v(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std::abs(total_momentum(p, y).norm() - total_momentum(p, x).norm()) <= 1e-14);
  CHECK(std::abs(kinetic_energy(p, y) - kinetic_energy(p, x)) <= 1e-14);
}

TEST_CASE("resolve errors: not in contact, receding") {
  SystemParams p = SystemParams::create(2, 2, 0.1, Vec::Ones(2));
  BallArray q(2, 2), v(2, 2);
  q << 0.3, 0.6,
       0.5, 0.5;
  v << 1.0, -1.0,
       0.0, 0.0;
  PhasePoint far{q, v};
  Vec normal(2);
  normal << -1, 0;
  CHECK_THROWS_AS(resolve_collision(p, far, {0, 1}, normal), NotInContact);

  q << 0.3, 0.5,
       0.5, 0.5;
  v << -1.0, 1.0,
       0.0, 0.0;
  PhasePoint receding{q, v};
  normal = pair_delta(receding.q, {0, 1}).normalized();
  CHECK_THROWS_AS(resolve_collision(p, receding, {0, 1}, normal), Receding);
}

TEST_CASE("mass-metric reflection agrees with the classical exchange") {
  SeedStream rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 3);
    Vec m(n);
    for (int i = 0; i < n; ++i) m[i] = rng.uniform(0.2, 5.0);
    SystemParams p = SystemParams::create(n, 2, 0.05, m);

    // synthetic contact of pair (0,1) with an approaching velocity
    BallArray q = BallArray::Zero(2, n);
    q(0, 0) = 0.3;
    q(1, 0) = 0.3;
    const Real angle = rng.uniform(0, 2 * M_PI);
    q(0, 1) = q(0, 0) + 2 * p.radius * std::cos(angle);
    q(1, 1) = q(1, 0) + 2 * p.radius * std::sin(angle);
    for (int i = 2; i < n; ++i) {
      q(0, i) = 0.8;
      q(1, i) = 0.1 + 0.25 * i;
    }
    BallArray v = unflat(rng.gaussian_vec(2 * n), 2, n);
    Vec normal = pair_delta(q, {0, 1}).normalized();
    Vec dv = v.col(0) - v.col(1);
    if (dv.dot(normal) >= 0) {
      v.col(0) -= 2 * dv.dot(normal) * normal;  // flip to approaching
      dv = v.col(0) - v.col(1);
    }
    if (dv.dot(normal) >= 0) continue;
    PhasePoint x{q, v};

    PhasePoint classical = resolve_collision(p, x, {0, 1}, normal);
    BallArray reflected = reflect_velocities(p, x.v, {0, 1}, normal);
    CHECK((classical.v - reflected).lpNorm<Eigen::Infinity>() <= 1e-12);

    // conservation, exact to double precision
    CHECK(std::abs(kinetic_energy(p, classical) - kinetic_energy(p, x)) <= 1e-12);
    CHECK((total_momentum(p, classical) - total_momentum(p, x)).norm() <= 1e-12);

    // relative speed is preserved by the reflection
    Vec dv_post = classical.v.col(0) - classical.v.col(1);
    CHECK(std::abs(dv_post.norm() - dv.norm()) <= 1e-12);
  }
}

TEST_CASE("simulate stops at time before the first collision") {
  SystemParams p = fixture3();
  PhasePoint x = generate_state(p, 4);
  auto c = next_collision(p, x, 100.0);
  REQUIRE(c.has_value());
  TrajectorySegment seg = simulate(p, x, StopRule::at_time(0.5 * c->dt));
  CHECK(seg.events.empty());
  CHECK(seg.t_end == doctest::Approx(0.5 * c->dt));
  PhasePoint direct = advance_free(p, x, 0.5 * c->dt);
  CHECK((seg.x_end.q - direct.q).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("two-ball system only ever collides as the single pair") {
  SystemParams p = SystemParams::create(2, 2, 0.12, Vec::Ones(2));
  PhasePoint x = generate_state(p, 8);
  TrajectorySegment seg = simulate(p, x, StopRule::after_collisions(25));
  CHECK(seg.events.size() == 25);
  for (const CollisionEvent& ev : seg.events) CHECK(ev.pair == BallPair{0, 1});
}

TEST_CASE("conservation and ordering over a long run") {
  SystemParams p = fixture3();
  PhasePoint x = generate_state(p, 42);
  TrajectorySegment seg = simulate(p, x, StopRule::after_collisions(1000));
  CHECK(seg.events.size() == 1000);
  CHECK(std::abs(kinetic_energy(p, seg.x_end) - 0.5) <= 1e-9);
  CHECK(total_momentum(p, seg.x_end).norm() <= 1e-9);
  Real prev = 0;
  for (const CollisionEvent& ev : seg.events) {
    CHECK(ev.t > prev);
    CHECK(ev.rel_speed > 0);
    CHECK(ev.cos_phi > 0);
    CHECK(ev.cos_phi <= 1 + 1e-12);
    prev = ev.t;
  }
}

TEST_CASE("relative speed is identical on both collision sides") {
  SystemParams p = fixture3();
  PhasePoint x = generate_state(p, 10);
  TrajectorySegment seg = simulate(p, x, StopRule::after_collisions(200));
  replay_segment(p, seg, nullptr,
                 [&](const PhasePoint& at_contact, const CollisionEvent& ev) {
                   PhasePoint post =
                       resolve_collision(p, at_contact, ev.pair, ev.normal);
                   Vec dv_post = post.v.col(ev.pair.i) - post.v.col(ev.pair.j);
                   CHECK(std::abs(dv_post.norm() - ev.rel_speed) <= 1e-12);
                 });
}

TEST_CASE("re-simulated reversibility at the roundoff-supported span") {
  // Per-step roundoff (~1e-16) is amplified by the flow's own hyperbolicity
  // at a measured ~e^2.1 per collision, so re-detected reversal can only
  // track the original orbit for about ten events in double precision.
  SystemParams p = fixture3();
  for (std::uint64_t seed : {2024u, 7u, 99u}) {
    PhasePoint x0 = generate_state(p, seed);
    TrajectorySegment fwd = simulate(p, x0, StopRule::after_collisions(6));
    TrajectorySegment back =
        simulate(p, time_reverse(fwd.x_end), StopRule::at_time(fwd.t_end));
    PhasePoint recovered = time_reverse(back.x_end);
    for (int i = 0; i < p.ball_count; ++i)
      CHECK(min_image_delta(recovered.q.col(i), x0.q.col(i)).norm() <= 1e-9);
    CHECK((recovered.v - x0.v).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(back.events.size() == fwd.events.size());
  }
}

TEST_CASE("mirrored-replay reversibility over many collisions") {
  // With event times and pairs pinned to the recorded segment, the reversal
  // identity holds over long horizons.
  SystemParams p = fixture3();
  PhasePoint x0 = generate_state(p, 2024);
  TrajectorySegment fwd = simulate(p, x0, StopRule::after_collisions(500));
  TrajectorySegment rev = reverse_segment(p, fwd);
  CHECK((rev.x_end.q - x0.q).lpNorm<Eigen::Infinity>() == 0.0);

  PhasePoint cur = rev.x0;
  replay_segment(
      p, rev,
      [&](const PhasePoint& at, Real dt) { cur = advance_free(p, at, dt); },
      [&](const PhasePoint& at, const CollisionEvent& ev) {
        cur = resolve_collision(p, at, ev.pair, ev.normal);
      });
  PhasePoint recovered = time_reverse(cur);
  for (int i = 0; i < p.ball_count; ++i)
    CHECK(min_image_delta(recovered.q.col(i), x0.q.col(i)).norm() <= 1e-9);
  CHECK((recovered.v - x0.v).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("replay reproduces the recorded endpoint bit-exactly") {
  SystemParams p = fixture3();
  PhasePoint x = generate_state(p, 77);
  TrajectorySegment seg = simulate(p, x, StopRule::after_collisions(50));
  PhasePoint cur = seg.x0;
  replay_segment(
      p, seg,
      [&](const PhasePoint& at, Real dt) {
        cur = advance_free(p, at, dt);
      },
      [&](const PhasePoint& at, const CollisionEvent& ev) {
        cur = resolve_collision(p, at, ev.pair, ev.normal);
      });
  CHECK((cur.q - seg.x_end.q).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((cur.v - seg.x_end.v).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("reverse_segment mirrors contacts exactly") {
  SystemParams p = fixture3();
  PhasePoint x = generate_state(p, 5);
  TrajectorySegment seg = simulate(p, x, StopRule::after_collisions(40));
  TrajectorySegment rev = reverse_segment(p, seg);
  CHECK(rev.events.size() == seg.events.size());
  // replaying the mirrored segment must land on the reversed start
  PhasePoint cur = rev.x0;
  for (const CollisionEvent& ev : rev.events) {
    cur = advance_free(p, cur, ev.dt_flight);
    cur = resolve_collision(p, cur, ev.pair, ev.normal);
  }
  cur = advance_free(p, cur, rev.final_flight_dt);
  for (int i = 0; i < p.ball_count; ++i)
    CHECK(min_image_delta(cur.q.col(i), rev.x_end.q.col(i)).norm() <= 1e-10);
  CHECK((cur.v - rev.x_end.v).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("collision flood guard trips on dense event bursts") {
  SystemParams p = fixture3();
  PhasePoint x = generate_state(p, 42);
  FlowOptions opts;
  opts.flood_count = 3;
  opts.flood_scale = 1e12;  // window of 3 * 1e-9 * 1e12 = 3000 time units
  CHECK_THROWS_AS(simulate(p, x, StopRule::after_collisions(10), opts),
                  CollisionFlood);
}

TEST_CASE("events CSV round-trips into a collision sequence") {
  SystemParams p = fixture3();
  PhasePoint x = generate_state(p, 3);
  TrajectorySegment seg = simulate(p, x, StopRule::after_collisions(25));
  std::ostringstream os;
  write_events_csv(os, seg);
  std::istringstream is(os.str());
  CollisionSequence seq = CollisionSequence::from_events_csv(p.ball_count, is);
  REQUIRE(seq.size() == seg.events.size());
  for (std::size_t l = 0; l < seq.size(); ++l) {
    CHECK(seq.labels[l] == seg.events[l].pair);
    CHECK(seq.times[l] == seg.events[l].t);  // 18 digits round-trip exactly
  }
}
