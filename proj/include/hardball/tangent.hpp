#pragma once

#include "hardball/flow.hpp"
#include "hardball/phase.hpp"
#include "hardball/system.hpp"
#include "hardball/types.hpp"

#include <iosfwd>
#include <vector>

namespace hardball {

// Perturbation (dq, dv) of a phase point, carried in the mass metric.
// Legal vectors satisfy sum_i m_i dq_i = 0, sum_i m_i dv_i = 0 and
// <v, dv> = 0 at the base point.
struct TangentVector {
  BallArray dq;
  BallArray dv;

  static TangentVector zero(const SystemParams& p);
};

// The operators entering the collision map, assembled at the contact point
// as dense matrices on the flattened compound space:
//   R      mass-orthogonal reflection across the boundary tangent hyperplane
//   V      projection onto the boundary tangent space along v^-
//   V_adj  its mass-metric adjoint (projection along the normal)
//   K      second fundamental form of the pair cylinder (inner normal field)
// and dv_jump = 2 cos(phi) R V_adj K V, the velocity part of the map.
struct CollisionFrame {
  BallPair pair;
  BallArray v_pre;   // incoming compound velocity at contact
  Vec n;             // flattened unit inner normal (mass metric)
  Mat R;
  Mat V;
  Mat V_adj;
  Mat K;
  Real cos_phi = 0;  // <n, v+> in the mass metric
  Mat dv_jump;
};

// Free flight: dq' = dq + dt dv, dv' = dv.
TangentVector propagate_free(const TangentVector& w, Real dt);

// Assembles the frame at a contact of `pair` (x must be at contact, with the
// pre-collision velocity).  Throws Grazing below grazing_cos.
CollisionFrame build_frame(const SystemParams& p, const PhasePoint& x,
                           BallPair pair);

// Collision map dq+ = R dq-, dv+ = R dv- + dv_jump dq-, followed by
// re-projection onto the tangency constraints; the projection residual is
// reported through *reproject_residual when given.
TangentVector propagate_collision(const SystemParams& p, const TangentVector& w,
                                  const CollisionFrame& frame,
                                  Real* reproject_residual = nullptr);

// Infinitesimal Lyapunov form Q = <dq, dv> in the mass metric.
Real lyapunov_form(const SystemParams& p, const TangentVector& w);

enum class SampleSide { Flight, Pre, Post };

// Sampled value of the propagated vector.  Tangent norms grow exponentially
// with the collision count, so the carried vector is rescaled whenever its
// norm leaves [1e-6, 1e6]; `log_scale` accumulates the logarithm of the
// total factor divided out.  Original-scale quantities are
// q_value * exp(2 log_scale) and norm * exp(log_scale); the propagation is
// linear, so the rescaled vector is itself a valid tangent vector and every
// pointwise identity holds for it unchanged.
struct TangentSample {
  Real t = 0;
  SampleSide side = SampleSide::Flight;
  TangentVector w;
  Real q_value = 0;  // Lyapunov form at the sample (rescaled vector)
  Real norm_dq = 0;
  Real norm_dv = 0;
  Real log_scale = 0;
};

struct TangentTrace {
  std::vector<TangentSample> samples;
  TangentVector w_end;
  Real end_log_scale = 0;
  Real max_reproject_residual = 0;

  // log of |w(t_end)| / |w(0)| in the full phase norm
  Real log_norm_gain(const SystemParams& p) const;
};

// Composes the free-flight and collision maps over a recorded segment,
// sampling at both sides of every event plus `samples_per_flight` uniform
// points inside each flight leg.
TangentTrace propagate_along(const SystemParams& p, const TangentVector& w0,
                             const TrajectorySegment& seg,
                             int samples_per_flight = 8);

// Propagates several vectors over the same segment, building each collision
// frame once.  No sampling; returns the end vectors.
std::vector<TangentVector> propagate_many(const SystemParams& p,
                                          const std::vector<TangentVector>& ws,
                                          const TrajectorySegment& seg);

// Trace export: CSV columns t,side,Q,norm_dq,norm_dv.
void write_tangent_trace_csv(std::ostream& os, const TangentTrace& trace);

}  // namespace hardball
