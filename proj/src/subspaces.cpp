#include "hardball/subspaces.hpp"

#include "hardball/errors.hpp"
#include "hardball/graphs.hpp"
#include "hardball/io.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace hardball {

BallArray CurvatureOperator::apply(const SystemParams& p,
                                   const BallArray& dq) const {
  const Vec mdiag = mass_diagonal(p);
  Vec coords = basis.transpose() * (mdiag.asDiagonal() * flat(dq));
  Vec dv = basis * (B * coords);
  return unflat(dv, p.dim, p.ball_count);
}

namespace {

Real spectral_norm_sym(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(s, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

// Evolution of the flat Lagrangian family along a segment, carried as the
// coordinate pair (A, C) with dq = E A, dv = E C.  The family is rescaled by
// A^{-1} after every collision, which keeps the entries bounded while
// leaving the graph operator C A^{-1} unchanged.
Mat evolve_flat_family(const SystemParams& p, const Mat& basis,
                       const TrajectorySegment& seg, Real* sym_residual) {
  const int d = p.reduced_dim;
  const Vec mdiag = mass_diagonal(p);
  Mat A = Mat::Identity(d, d);
  Mat C = Mat::Zero(d, d);

  auto flight = [&](const PhasePoint&, Real dt) { A += dt * C; };
  auto event = [&](const PhasePoint& x_contact, const CollisionEvent& ev) {
    CollisionFrame fr = build_frame(p, x_contact, ev.pair);
    const Mat lift = basis.transpose() * mdiag.asDiagonal();
    const Mat R_red = lift * fr.R * basis;
    const Mat J_red = lift * fr.dv_jump * basis;
    Mat A_post = R_red * A;
    Mat C_post = R_red * C + J_red * A;
    C = C_post * A_post.inverse();
    A = Mat::Identity(d, d);
  };
  replay_segment(p, seg, flight, event);

  Mat B = C * A.inverse();
  if (sym_residual) *sym_residual = 0.5 * spectral_norm_sym(Mat(B - B.transpose()));
  return 0.5 * (B + B.transpose());
}

}  // namespace

CurvatureOperator unstable_curvature_at_depth(const SystemParams& p,
                                              const PhasePoint& x, long depth,
                                              const FlowOptions& flow) {
  CurvatureOperator op;
  op.basis = reduced_basis(p);
  op.depth = depth;
  if (depth <= 0) {
    op.B = Mat::Zero(p.reduced_dim, p.reduced_dim);
    op.min_eigenvalue = 0;
    return op;
  }

  TrajectorySegment past =
      simulate(p, time_reverse(x), StopRule::after_collisions(depth), flow);
  TrajectorySegment fwd = reverse_segment(p, past);
  op.B = evolve_flat_family(p, op.basis, fwd, &op.sym_residual);
  Eigen::SelfAdjointEigenSolver<Mat> eig(op.B, Eigen::EigenvaluesOnly);
  op.min_eigenvalue = eig.eigenvalues().minCoeff();
  return op;
}

CurvatureOperator unstable_curvature(const SystemParams& p, const PhasePoint& x,
                                     const CurvatureOptions& opts) {
  long depth = std::min<long>(4, opts.max_depth);
  CurvatureOperator prev = unstable_curvature_at_depth(p, x, depth, opts.flow);
  while (depth < opts.max_depth) {
    depth = std::min(depth * 2, opts.max_depth);
    CurvatureOperator cur = unstable_curvature_at_depth(p, x, depth, opts.flow);
    cur.convergence_residual = spectral_norm_sym(Mat(cur.B - prev.B));
    if (cur.convergence_residual < opts.convergence_tol) return cur;
    prev = std::move(cur);
  }
  throw NoConvergence(
      "unstable_curvature: operator gap still above tolerance at the depth "
      "budget; too few collisions in the past window");
}

CurvatureOperator stable_curvature(const SystemParams& p, const PhasePoint& x,
                                   const CurvatureOptions& opts) {
  return unstable_curvature(p, time_reverse(x), opts);
}

Real angle_to_graph(const SystemParams& p, const TangentVector& w,
                    const CurvatureOperator& op, Real sign) {
  const Vec mdiag = mass_diagonal(p);
  const Mat lift = op.basis.transpose() * mdiag.asDiagonal();
  Vec a = lift * flat(w.dq);
  Vec b = lift * flat(w.dv);
  const Mat sB = sign * op.B;
  // least-squares foot of (a,b) on the graph {(u, sB u)}
  Mat normal = Mat::Identity(a.size(), a.size()) + sB.transpose() * sB;
  Vec u = normal.ldlt().solve(a + sB.transpose() * b);
  const Real res2 = (a - u).squaredNorm() + (b - sB * u).squaredNorm();
  const Real nrm2 = a.squaredNorm() + b.squaredNorm();
  if (nrm2 == 0) throw ContractViolation("angle_to_graph: zero vector");
  return std::sqrt(std::max<Real>(0, res2 / nrm2));
}

TangentVector collision_plane_seed(const SystemParams& p, const PhasePoint& x,
                                   BallPair pair, SeedMode mode,
                                   const CurvatureOperator* curvature) {
  const Real dist = pair_distance(x.q, pair);
  if (std::abs(dist - 2 * p.radius) > 1e-8)
    throw NotInContact("collision_plane_seed: pair is not at contact");

  Vec e = pair_delta(x.q, pair);
  e /= e.norm();
  Vec rv = x.v.col(pair.i) - x.v.col(pair.j);
  const Real rel_speed = rv.norm();
  if (rel_speed < 1e-14)
    throw ZeroRelativeVelocity("collision_plane_seed: pair at relative rest");

  // w spans the contact plane with the relative velocity removed; it
  // degenerates exactly for head-on impacts where e and rv are parallel
  Vec w = e - (e.dot(rv) / rv.squaredNorm()) * rv;
  if (w.norm() < 1e-8)
    throw DegenerateSpan(
        "collision_plane_seed: head-on collision, contact plane collapses");
  w /= w.norm();

  const Real mi = p.masses[pair.i], mj = p.masses[pair.j];
  TangentVector seed = TangentVector::zero(p);
  seed.dq.col(pair.i) = mj * w;
  seed.dq.col(pair.j) = -mi * w;
  seed.dq /= std::sqrt(mi * mj * (mi + mj));  // unit mass norm

  if (mode == SeedMode::Curved) {
    if (!curvature)
      throw ContractViolation("collision_plane_seed: curved mode needs an operator");
    seed.dv = curvature->apply(p, seed.dq);
  }
  return seed;
}

namespace {

struct ScanChecks {
  Real eps_gap = 0;
  std::optional<std::string> hypothesis_failure;
};

ScanChecks scan_segment_checks(const SystemParams& p,
                               const TrajectorySegment& seg,
                               long richness_window) {
  ScanChecks out;
  if (seg.events.size() < 2) {
    out.hypothesis_failure = "fewer than two collisions within budget";
    return out;
  }
  out.eps_gap = std::numeric_limits<Real>::infinity();
  for (std::size_t l = 1; l < seg.events.size(); ++l)
    out.eps_gap = std::min(out.eps_gap, seg.events[l].dt_flight);

  CollisionSequence seq = CollisionSequence::from_segment(p, seg);
  const auto bounds = richness_blocks(seq);
  std::size_t prev = 0;
  for (std::size_t b : bounds) {
    if (b - prev > static_cast<std::size_t>(richness_window)) {
      out.hypothesis_failure =
          "a connected block needs more than the richness window";
      return out;
    }
    prev = b;
  }
  if (seq.size() - prev > static_cast<std::size_t>(richness_window))
    out.hypothesis_failure =
        "trailing events never close a connected block within the window";
  return out;
}

Real trace_ratio(const SystemParams& p, const TangentTrace& trace) {
  return std::exp(trace.log_norm_gain(p));
}

}  // namespace

CertificateSearch expansion_certificate(const SystemParams& p,
                                        const PhasePoint& x0, Real L,
                                        long budget,
                                        const CertificateOptions& opts) {
  if (!(L > 0)) throw ContractViolation("expansion_certificate: L must be > 0");
  CertificateSearch out;

  const MassMultiset ms = MassMultiset::of(p.masses);
  const Real G = fast_collision_threshold(ms);
  const Real t_required = (L - 1) * p.radius / G;

  TrajectorySegment past = simulate(p, time_reverse(x0),
                                    StopRule::after_collisions(budget),
                                    opts.flow);
  const ScanChecks checks = scan_segment_checks(p, past, opts.richness_window);
  out.epsilon_gap = checks.eps_gap;
  if (checks.hypothesis_failure) {
    out.status = SearchStatus::HypothesisUnmet;
    out.detail = *checks.hypothesis_failure;
    return out;
  }

  // earliest qualifying collision first (smallest t); ties by larger speed
  // are impossible here since event times are distinct
  for (std::size_t l = 0; l + 1 < past.events.size(); ++l) {
    const CollisionEvent& ev = past.events[l];
    if (ev.t <= t_required) continue;
    if (ev.rel_speed < G) continue;

    const Real flight_after = past.events[l + 1].dt_flight;
    const Real t_base = ev.t + 0.5 * flight_after;
    TrajectorySegment prefix = truncate_segment(p, past, t_base);
    TrajectorySegment fwd = reverse_segment(p, prefix);

    // the seed lives right before the chosen collision (forward time); a
    // flat seed is constant along the preceding flight, so planting it at
    // the flight midpoint keeps the base the guard distance away from
    // every collision
    PhasePoint contact = advance_free(p, fwd.x0, fwd.events.front().dt_flight);
    TangentVector seed;
    try {
      seed = collision_plane_seed(p, contact, fwd.events.front().pair);
    } catch (const DegenerateSpan&) {
      continue;  // head-on: scan for the next eligible collision
    }

    TangentTrace trace = propagate_along(p, seed, fwd, 0);
    const Real ratio = trace_ratio(p, trace);
    if (!(ratio > L)) continue;

    Certificate cert;
    cert.kind = CertKind::Expansion;
    cert.base = fwd.x0;
    cert.t = t_base;
    cert.seed = seed;
    cert.ratio = ratio;
    cert.target_L = L;
    cert.event_index = static_cast<long>(l);
    out.status = SearchStatus::Found;
    out.certificate = std::move(cert);
    return out;
  }

  out.status = SearchStatus::BudgetExhausted;
  out.detail = "no qualifying collision deep enough in the past window";
  return out;
}

CertificateSearch contraction_certificate(const SystemParams& p,
                                          const PhasePoint& x0, Real L,
                                          long budget,
                                          const CertificateOptions& opts) {
  CertificateSearch exp_search =
      expansion_certificate(p, time_reverse(x0), L, budget, opts);
  if (exp_search.status != SearchStatus::Found) return exp_search;
  const Certificate& ce = *exp_search.certificate;

  // Rebuild the expansion geometry; the backward orbit of time_reverse(x0)
  // is the forward orbit of x0, so the same truncation mirrors exactly.
  TrajectorySegment forward =
      simulate(p, x0, StopRule::after_collisions(budget), opts.flow);
  TrajectorySegment prefix = truncate_segment(p, forward, ce.t);

  CertificateSearch out;
  out.epsilon_gap = exp_search.epsilon_gap;
  if (!forward.events.empty() &&
      forward.events.front().dt_flight < 0.5 * out.epsilon_gap) {
    out.status = SearchStatus::HypothesisUnmet;
    out.detail = "base point closer than half the minimum gap to a collision";
    return out;
  }

  // endpoint of the expansion run, recomputed along the mirrored segment
  TrajectorySegment exp_fwd = reverse_segment(p, prefix);
  TangentTrace exp_trace = propagate_along(p, ce.seed, exp_fwd, 0);

  TangentVector seed{exp_trace.w_end.dq, -exp_trace.w_end.dv};
  const Real scale = phase_norm(p, seed.dq, seed.dv);
  seed.dq /= scale;
  seed.dv /= scale;

  TangentTrace trace = propagate_along(p, seed, prefix, 0);
  const Real ratio = trace_ratio(p, trace);

  Certificate cert;
  cert.kind = CertKind::Contraction;
  cert.base = x0;
  cert.t = ce.t;
  cert.seed = std::move(seed);
  cert.ratio = ratio;
  cert.target_L = L;
  cert.event_index = ce.event_index;

  if (!(ratio < 1 / L)) {
    out.status = SearchStatus::BudgetExhausted;
    out.detail = "mirrored vector failed to contract below 1/L";
    return out;
  }
  out.status = SearchStatus::Found;
  out.certificate = std::move(cert);
  return out;
}

VerifyResult verify_certificate(const SystemParams& p, const Certificate& cert) {
  TrajectorySegment seg = simulate(p, cert.base, StopRule::at_time(cert.t));
  TangentTrace trace = propagate_along(p, cert.seed, seg, 0);
  VerifyResult res;
  res.ratio = trace_ratio(p, trace);
  res.ratio_matches =
      std::abs(res.ratio - cert.ratio) <=
      1e-9 * std::max(std::abs(res.ratio), std::abs(cert.ratio));
  res.threshold_met = cert.kind == CertKind::Expansion
                          ? res.ratio > cert.target_L
                          : res.ratio < 1 / cert.target_L;
  return res;
}

std::string serialize_certificate(const SystemParams& p, const Certificate& cert) {
  std::ostringstream os;
  os << "certificate {\n";
  os << "  kind: "
     << (cert.kind == CertKind::Expansion ? "expansion" : "contraction") << '\n';
  os << "  balls: " << p.ball_count << '\n';
  os << "  dimension: " << p.dim << '\n';
  os << "  radius: " << fmt_real(p.radius) << '\n';
  os << "  masses: " << fmt_vec(p.masses) << '\n';
  os << "  L: " << fmt_real(cert.target_L) << '\n';
  os << "  t: " << fmt_real(cert.t) << '\n';
  os << "  ratio: " << fmt_real(cert.ratio) << '\n';
  os << "  event_index: " << cert.event_index << '\n';
  os << "  base_q: " << fmt_ball_array(cert.base.q) << '\n';
  os << "  base_v: " << fmt_ball_array(cert.base.v) << '\n';
  os << "  seed_dq: " << fmt_ball_array(cert.seed.dq) << '\n';
  os << "  seed_dv: " << fmt_ball_array(cert.seed.dv) << '\n';
  os << "}\n";
  return os.str();
}

Certificate parse_certificate(const SystemParams& p, const std::string& text) {
  std::istringstream in(text);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
    };
    trim(key);
    trim(value);
    kv[key] = value;
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw ConfigError("certificate record missing field '" + key + "'");
    return it->second;
  };

  const Index n_flat = static_cast<Index>(p.dim) * p.ball_count;
  Certificate cert;
  cert.kind = need("kind") == "expansion" ? CertKind::Expansion
                                          : CertKind::Contraction;
  cert.target_L = std::stod(need("L"));
  cert.t = std::stod(need("t"));
  cert.ratio = std::stod(need("ratio"));
  cert.event_index = std::stol(need("event_index"));
  cert.base.q = unflat(parse_vec(need("base_q"), n_flat), p.dim, p.ball_count);
  cert.base.v = unflat(parse_vec(need("base_v"), n_flat), p.dim, p.ball_count);
  cert.seed.dq = unflat(parse_vec(need("seed_dq"), n_flat), p.dim, p.ball_count);
  cert.seed.dv = unflat(parse_vec(need("seed_dv"), n_flat), p.dim, p.ball_count);
  return cert;
}

}  // namespace hardball
