#pragma once

#include "hardball/types.hpp"

#include <vector>

namespace hardball {

// Numerical guards.  The dynamics itself is exact; these only decide when a
// run is aborted as (numerically) singular and how sharply contacts are
// resolved.
struct ToleranceSet {
  Real contact_tol = 1e-12;       // root-finding tolerance for contact times
  Real singular_gap = 1e-9;       // minimum allowed gap between distinct events
  Real grazing_cos = 1e-6;        // minimum allowed cos(phi) at impact
  Real conservation_tol = 1e-9;   // energy/momentum drift budget
};

// Immutable description of an N-ball system on the flat unit torus T^nu.
//
// The kinetic-energy (mass) metric <u,w> = sum_i m_i <u_i,w_i> is the inner
// product used everywhere; collisions are orthogonal reflections in it.
struct SystemParams {
  int ball_count = 0;      // N >= 2
  int dim = 0;             // nu >= 2, torus dimension
  Real radius = 0;         // common ball radius, < 1/4
  Vec masses;              // N positive masses
  Real total_mass = 0;     // sum of masses
  Real min_mass = 0;       // smallest mass
  int reduced_dim = 0;     // nu * (N - 1), dimension of the billiard table
  ToleranceSet tol;

  // Validates every invariant (N >= 2, nu >= 2, positive masses, r < 1/4,
  // positive tolerances) and fills the derived fields.
  static SystemParams create(int balls, int dim, Real radius, Vec masses,
                             ToleranceSet tol = {});
};

// Mass-metric inner product of two compound vectors (dim x N each).
Real mass_inner(const SystemParams& p, const BallArray& u, const BallArray& w);

Real mass_norm(const SystemParams& p, const BallArray& u);

// Norm of a full tangent vector: sqrt(|dq|^2 + |dv|^2) in the mass metric.
Real phase_norm(const SystemParams& p, const BallArray& dq, const BallArray& dv);

// Removes the uniform translation component: result satisfies
// sum_i m_i u_i = 0 and is the mass-orthogonal projection onto that subspace.
BallArray remove_translation(const SystemParams& p, const BallArray& u);

// Diagonal of the mass metric as a flat N*nu vector (mass repeated per
// coordinate), matching the flattened compound layout.
Vec mass_diagonal(const SystemParams& p);

// Mass-orthonormal basis of the translation-reduced compound subspace
// {w : sum_i m_i w_i = 0}; columns of the returned (N*nu) x reduced_dim
// matrix E satisfy E^T M E = I.
Mat reduced_basis(const SystemParams& p);

// Thin view implementing the metric as an object where one is convenient.
struct MassMetric {
  const SystemParams& params;
  Real inner(const BallArray& u, const BallArray& w) const {
    return mass_inner(params, u, w);
  }
  Real norm(const BallArray& u) const { return mass_norm(params, u); }
};

}  // namespace hardball
