#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hardball/errors.hpp"
#include "hardball/phase.hpp"
#include "hardball/random.hpp"
#include "hardball/system.hpp"

#include <cmath>

using namespace hardball;

namespace {

SystemParams two_ball_params(Real m1 = 2, Real m2 = 3) {
  Vec m(2);
  m << m1, m2;
  return SystemParams::create(2, 2, 0.1, m);
}

}  // namespace

TEST_CASE("mass_inner weighted dot product") {
  SystemParams p = two_ball_params();
  BallArray u(2, 2);
  u << 1, 0,
       0, 1;
  CHECK(mass_inner(p, u, u) == doctest::Approx(5.0).epsilon(1e-15));

  BallArray z = BallArray::Zero(2, 2);
  CHECK(mass_inner(p, z, u) == 0.0);

  BallArray bad(3, 2);
  CHECK_THROWS_AS(mass_inner(p, bad, bad), ContractViolation);
}

TEST_CASE("mass_inner symmetry is exact") {
  SystemParams p = two_ball_params(0.7, 4.2);
  SeedStream rng(7);
  for (int k = 0; k < 200; ++k) {
    BallArray u = unflat(rng.gaussian_vec(4), 2, 2);
    BallArray w = unflat(rng.gaussian_vec(4), 2, 2);
    CHECK(mass_inner(p, u, w) == mass_inner(p, w, u));
  }
}

TEST_CASE("normalized velocity has unit mass norm") {
  SystemParams p = two_ball_params();
  BallArray q(2, 2);
  q << 0.1, 0.6,
       0.1, 0.6;
  BallArray v(2, 2);
  v << 1.0, -2.0,
       0.3, 0.7;
  PhasePoint x = normalize_state(p, q, v);
  CHECK(mass_inner(p, x.v, x.v) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("normalize_state invariants and idempotence") {
  SystemParams p = two_ball_params(1.5, 0.4);
  SeedStream rng(11);
  for (int k = 0; k < 100; ++k) {
    BallArray q(2, 2);
    q << 0.1, 0.6,
         0.2, 0.7;
    BallArray v = unflat(rng.gaussian_vec(4), 2, 2);
    PhasePoint x = normalize_state(p, q, v);
    CHECK(total_momentum(p, x).lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK(std::abs(kinetic_energy(p, x) - 0.5) <= 1e-14);

    PhasePoint y = normalize_state(p, x.q, x.v);
    CHECK((y.v - x.v).lpNorm<Eigen::Infinity>() <= 1e-14);
  }
}

TEST_CASE("normalize_state degenerate inputs") {
  SystemParams p = two_ball_params();
  BallArray q(2, 2);
  q << 0.1, 0.6,
       0.1, 0.6;
  BallArray v_const(2, 2);
  v_const << 3, 3,
             -1, -1;
  CHECK_THROWS_AS(normalize_state(p, q, v_const), ZeroEnergy);

  BallArray q_overlap(2, 2);
  q_overlap << 0.10, 0.15,
               0.10, 0.10;
  BallArray v(2, 2);
  v << 1, -1,
       0, 0;
  CHECK_THROWS_AS(normalize_state(p, q_overlap, v), InadmissibleConfiguration);
}

TEST_CASE("min_image_delta wraparound and tie-break") {
  Vec a(2), b(2);
  a << 0.95, 0.0;
  b << 0.05, 0.0;
  Vec d = min_image_delta(a, b);
  CHECK(d[0] == doctest::Approx(-0.10).epsilon(1e-15));
  CHECK(d[1] == 0.0);
  CHECK(d.norm() == doctest::Approx(0.1).epsilon(1e-15));

  CHECK(min_image_delta(a, a).norm() == 0.0);

  a << 0.25, 0.5;
  b << 0.75, 0.5;
  d = min_image_delta(a, b);
  CHECK(d[0] == -0.5);  // -1/2 is the canonical representative, +1/2 excluded
  CHECK(d[1] == 0.0);
}

TEST_CASE("min_image components stay in [-1/2, 1/2)") {
  SeedStream rng(23);
  for (int k = 0; k < 2000; ++k) {
    const Real d = rng.uniform(-6, 6);
    const Real w = min_image_component(d);
    CHECK(w >= -0.5);
    CHECK(w < 0.5);
    // representative of the same class
    CHECK(std::abs(std::remainder(d - w, 1.0)) <= 1e-12);
  }
}

TEST_CASE("time_reverse is a bit-exact involution") {
  SystemParams p = two_ball_params();
  SeedStream rng(5);
  BallArray q(2, 2);
  q << 0.1, 0.6,
       0.2, 0.8;
  PhasePoint x = normalize_state(p, q, unflat(rng.gaussian_vec(4), 2, 2));
  PhasePoint y = time_reverse(time_reverse(x));
  CHECK((y.q - x.q).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((y.v - x.v).lpNorm<Eigen::Infinity>() == 0.0);

  PhasePoint r = time_reverse(x);
  CHECK(std::abs(kinetic_energy(p, r) - kinetic_energy(p, x)) == 0.0);
  CHECK(total_momentum(p, r).norm() == total_momentum(p, x).norm());
}

TEST_CASE("params validation") {
  Vec m = Vec::Ones(2);
  CHECK_THROWS_AS(SystemParams::create(1, 2, 0.1, Vec::Ones(1)), ContractViolation);
  CHECK_THROWS_AS(SystemParams::create(2, 1, 0.1, m), ContractViolation);
  CHECK_THROWS_AS(SystemParams::create(2, 2, 0.30, m), ContractViolation);
  CHECK_THROWS_AS(SystemParams::create(2, 2, -0.1, m), ContractViolation);
  Vec bad(2);
  bad << 1, -1;
  CHECK_THROWS_AS(SystemParams::create(2, 2, 0.1, bad), ContractViolation);

  SystemParams p = SystemParams::create(4, 3, 0.05, Vec::Ones(4));
  CHECK(p.reduced_dim == 9);
  CHECK(p.total_mass == 4.0);
  CHECK(p.min_mass == 1.0);
}

TEST_CASE("remove_translation projects onto zero mass-mean") {
  SystemParams p = SystemParams::create(3, 2, 0.1, Vec::Ones(3));
  SeedStream rng(3);
  for (int k = 0; k < 50; ++k) {
    BallArray u = unflat(rng.gaussian_vec(6), 2, 3);
    BallArray r = remove_translation(p, u);
    CHECK((r * p.masses).lpNorm<Eigen::Infinity>() <= 1e-14);
    // projection is idempotent
    CHECK((remove_translation(p, r) - r).lpNorm<Eigen::Infinity>() <= 1e-15);
  }
}

TEST_CASE("reduced basis is mass-orthonormal and translation-free") {
  SystemParams p = SystemParams::create(3, 2, 0.1,
                                        (Vec(3) << 1.0, 2.5, 0.3).finished());
  Mat e = reduced_basis(p);
  CHECK(e.rows() == 6);
  CHECK(e.cols() == p.reduced_dim);
  Vec mdiag = mass_diagonal(p);
  Mat gram = e.transpose() * mdiag.asDiagonal() * e;
  CHECK((gram - Mat::Identity(4, 4)).lpNorm<Eigen::Infinity>() <= 1e-12);
  for (Index c = 0; c < e.cols(); ++c) {
    BallArray col = unflat(e.col(c), p.dim, p.ball_count);
    CHECK((col * p.masses).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}
