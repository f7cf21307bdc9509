#include "hardball/tangent.hpp"

#include "hardball/errors.hpp"
#include "hardball/io.hpp"

#include <cmath>
#include <ostream>

namespace hardball {

TangentVector TangentVector::zero(const SystemParams& p) {
  return {BallArray::Zero(p.dim, p.ball_count),
          BallArray::Zero(p.dim, p.ball_count)};
}

TangentVector propagate_free(const TangentVector& w, Real dt) {
  return {w.dq + dt * w.dv, w.dv};
}

CollisionFrame build_frame(const SystemParams& p, const PhasePoint& x,
                           BallPair pair) {
  const Real dist = pair_distance(x.q, pair);
  if (std::abs(dist - 2 * p.radius) > 1e-8)
    throw NotInContact("build_frame: pair is not at contact distance");

  const Index n_flat = static_cast<Index>(p.dim) * p.ball_count;
  const Vec mdiag = mass_diagonal(p);

  // contact normal in the relative coordinate (from j to i)
  Vec e = pair_delta(x.q, pair);
  e /= e.norm();

  CollisionFrame fr;
  fr.pair = pair;
  fr.v_pre = x.v;
  fr.n = flat(cylinder_normal(p, pair, e));

  const Vec v = flat(x.v);
  const Real n_dot_v = fr.n.dot(mdiag.asDiagonal() * v);  // = -cos(phi)
  fr.cos_phi = -n_dot_v;
  if (fr.cos_phi < p.tol.grazing_cos)
    throw Grazing("build_frame: grazing contact");

  const Mat I = Mat::Identity(n_flat, n_flat);
  const Vec Mn = mdiag.asDiagonal() * fr.n;
  const Vec Mv = mdiag.asDiagonal() * v;

  fr.R = I - 2.0 * fr.n * Mn.transpose();
  // projection onto T(boundary) along v-; kills the flow direction, so it
  // extends the map to perturbations with a component along v-
  fr.V = I - (1.0 / n_dot_v) * v * Mn.transpose();
  fr.V_adj = I - (1.0 / n_dot_v) * fr.n * Mv.transpose();

  // second fundamental form of the pair cylinder: curvature of the sphere
  // |y| = 2r in the relative coordinate, lifted to the compound space
  const Real mi = p.masses[pair.i], mj = p.masses[pair.j];
  const Real mu = mi * mj / (mi + mj);
  Mat diff = Mat::Zero(p.dim, n_flat);  // w -> w_i - w_j
  for (int c = 0; c < p.dim; ++c) {
    diff(c, static_cast<Index>(pair.i) * p.dim + c) = 1.0;
    diff(c, static_cast<Index>(pair.j) * p.dim + c) = -1.0;
  }
  const Mat proj_e = Mat::Identity(p.dim, p.dim) - e * e.transpose();
  Vec inv_mass = mdiag.cwiseInverse();
  fr.K = (std::sqrt(mu) / (2 * p.radius)) * inv_mass.asDiagonal() *
         diff.transpose() * proj_e * diff;

  fr.dv_jump = 2 * fr.cos_phi * fr.R * fr.V_adj * fr.K * fr.V;
  return fr;
}

namespace {

// Projects onto sum_i m_i dq_i = 0, sum_i m_i dv_i = 0 and <v, dv> = 0.
TangentVector constrain(const SystemParams& p, const BallArray& v_base,
                        TangentVector w, Real* residual) {
  TangentVector out{remove_translation(p, w.dq), remove_translation(p, w.dv)};
  const Real vv = mass_inner(p, v_base, v_base);
  const Real proj = mass_inner(p, v_base, out.dv) / vv;
  out.dv -= proj * v_base;
  if (residual) {
    const Real scale = phase_norm(p, w.dq, w.dv);
    *residual = scale > 0
                    ? phase_norm(p, out.dq - w.dq, out.dv - w.dv) / scale
                    : 0;
  }
  return out;
}

}  // namespace

TangentVector propagate_collision(const SystemParams& p, const TangentVector& w,
                                  const CollisionFrame& frame,
                                  Real* reproject_residual) {
  const Vec dq = flat(w.dq);
  const Vec dv = flat(w.dv);
  Vec dq_post = frame.R * dq;
  Vec dv_post = frame.R * dv + frame.dv_jump * dq;

  TangentVector out{unflat(dq_post, p.dim, p.ball_count),
                    unflat(dv_post, p.dim, p.ball_count)};
  // tangency is re-imposed at the outgoing velocity v+ = R v-
  const BallArray v_post =
      unflat(frame.R * flat(frame.v_pre), p.dim, p.ball_count);
  return constrain(p, v_post, std::move(out), reproject_residual);
}

Real lyapunov_form(const SystemParams& p, const TangentVector& w) {
  return mass_inner(p, w.dq, w.dv);
}

namespace {

TangentSample make_sample(const SystemParams& p, Real t, SampleSide side,
                          const TangentVector& w, Real log_scale) {
  TangentSample s;
  s.t = t;
  s.side = side;
  s.w = w;
  s.q_value = lyapunov_form(p, w);
  s.norm_dq = mass_norm(p, w.dq);
  s.norm_dv = mass_norm(p, w.dv);
  s.log_scale = log_scale;
  return s;
}

}  // namespace

Real TangentTrace::log_norm_gain(const SystemParams& p) const {
  if (samples.empty()) return 0;
  const TangentSample& first = samples.front();
  const Real n0 = phase_norm(p, first.w.dq, first.w.dv);
  const Real n1 = phase_norm(p, w_end.dq, w_end.dv);
  return end_log_scale - first.log_scale + std::log(n1 / n0);
}

TangentTrace propagate_along(const SystemParams& p, const TangentVector& w0,
                             const TrajectorySegment& seg,
                             int samples_per_flight) {
  TangentTrace trace;
  TangentVector w = w0;
  Real t = 0;
  Real log_scale = 0;

  auto flight = [&](const PhasePoint&, Real dt) {
    if (dt > 0 && samples_per_flight > 0) {
      for (int s = 1; s <= samples_per_flight; ++s) {
        const Real ds = dt * s / (samples_per_flight + 1);
        trace.samples.push_back(make_sample(p, t + ds, SampleSide::Flight,
                                            propagate_free(w, ds), log_scale));
      }
    }
    w = propagate_free(w, dt);
    t += dt;
  };
  auto event = [&](const PhasePoint& x_contact, const CollisionEvent& ev) {
    trace.samples.push_back(make_sample(p, t, SampleSide::Pre, w, log_scale));
    CollisionFrame fr = build_frame(p, x_contact, ev.pair);
    Real residual = 0;
    w = propagate_collision(p, w, fr, &residual);
    trace.max_reproject_residual =
        std::max(trace.max_reproject_residual, residual);
    // keep the carried vector near unit scale so absolute tolerances on the
    // sampled values stay meaningful along exponentially growing traces
    const Real norm = phase_norm(p, w.dq, w.dv);
    if (norm > 2 || (norm > 0 && norm < 0.5)) {
      w.dq /= norm;
      w.dv /= norm;
      log_scale += std::log(norm);
    }
    trace.samples.push_back(make_sample(p, t, SampleSide::Post, w, log_scale));
  };

  trace.samples.push_back(make_sample(p, 0, SampleSide::Flight, w0, 0));
  replay_segment(p, seg, flight, event);
  trace.samples.push_back(make_sample(p, t, SampleSide::Flight, w, log_scale));
  trace.w_end = std::move(w);
  trace.end_log_scale = log_scale;
  return trace;
}

std::vector<TangentVector> propagate_many(const SystemParams& p,
                                          const std::vector<TangentVector>& ws,
                                          const TrajectorySegment& seg) {
  std::vector<TangentVector> cur = ws;
  auto flight = [&](const PhasePoint&, Real dt) {
    for (TangentVector& w : cur) w = propagate_free(w, dt);
  };
  auto event = [&](const PhasePoint& x_contact, const CollisionEvent& ev) {
    CollisionFrame fr = build_frame(p, x_contact, ev.pair);
    for (TangentVector& w : cur) w = propagate_collision(p, w, fr);
  };
  replay_segment(p, seg, flight, event);
  return cur;
}

void write_tangent_trace_csv(std::ostream& os, const TangentTrace& trace) {
  os << "t,side,Q,norm_dq,norm_dv\n";
  for (const TangentSample& s : trace.samples) {
    const char* side = s.side == SampleSide::Flight
                           ? "flight"
                           : (s.side == SampleSide::Pre ? "pre" : "post");
    os << fmt_real(s.t) << ',' << side << ',' << fmt_real(s.q_value) << ','
       << fmt_real(s.norm_dq) << ',' << fmt_real(s.norm_dv) << '\n';
  }
}

}  // namespace hardball
