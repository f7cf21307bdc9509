#pragma once

#include "hardball/estimates.hpp"
#include "hardball/flow.hpp"
#include "hardball/tangent.hpp"
#include "hardball/types.hpp"

#include <optional>
#include <string>

namespace hardball {

// Symmetric positive semi-definite curvature operator B expressed in a
// mass-orthonormal basis of the translation-reduced configuration tangent
// space.  Unstable vectors are (dq, +B dq); stable vectors (dq, -B dq).
struct CurvatureOperator {
  Mat B;                   // reduced_dim x reduced_dim, symmetric
  Mat basis;               // (N*dim) x reduced_dim, columns E with E^T M E = I
  long depth = 0;          // collisions actually used to build it
  Real sym_residual = 0;   // asymmetry removed by symmetrization
  Real min_eigenvalue = 0;
  Real convergence_residual = 0;  // operator-norm gap to the previous depth

  // dv = B[dq], mapping compound to compound through the basis.
  BallArray apply(const SystemParams& p, const BallArray& dq) const;
};

struct CurvatureOptions {
  long max_depth = 512;        // collision-count horizon for the past orbit
  Real convergence_tol = 1e-8; // operator-norm stopping gap between depths
  FlowOptions flow;
};

// Evolves the flat wavefront family (dv = 0 over a reduced basis) planted
// `depth` collisions in the past up to x and reads off dv = B dq.  Exact
// requested depth, no convergence requirement; depth 0 gives B = 0.
CurvatureOperator unstable_curvature_at_depth(const SystemParams& p,
                                              const PhasePoint& x, long depth,
                                              const FlowOptions& flow = {});

// Doubles the depth until successive operators differ by less than the
// convergence tolerance in operator norm.  Throws NoConvergence when the
// depth budget is exhausted, SingularOrbit from the backward flow.
CurvatureOperator unstable_curvature(const SystemParams& p, const PhasePoint& x,
                                     const CurvatureOptions& opts = {});

// Stable counterpart via time-reversal duality: literally
// unstable_curvature(time_reverse(x)); stable vectors are (dq, -B dq).
CurvatureOperator stable_curvature(const SystemParams& p, const PhasePoint& x,
                                   const CurvatureOptions& opts = {});

// Sine of the principal angle between a tangent vector and the graph
// subspace {(u, sign * B u)}.
Real angle_to_graph(const SystemParams& p, const TangentVector& w,
                    const CurvatureOperator& op, Real sign);

enum class SeedMode { Flat, Curved };

// In-plane seed at a contact of `pair`: dq is supported on the two colliding
// balls with the (m_j w, -m_i w) pattern, w picked in the plane spanned by
// the relative velocity and the contact line, orthogonal to the relative
// velocity.  Flat mode sets dv = 0; curved mode sets dv = B[dq] with the
// supplied unstable operator.  Throws DegenerateSpan for head-on collisions
// and ZeroRelativeVelocity.
TangentVector collision_plane_seed(const SystemParams& p, const PhasePoint& x,
                                   BallPair pair, SeedMode mode = SeedMode::Flat,
                                   const CurvatureOperator* curvature = nullptr);

enum class CertKind { Expansion, Contraction };

// A re-checkable witness: propagating `seed` from `base` for time `t`
// changes the full tangent norm by `ratio` (> L for expansion, < 1/L for
// contraction).
struct Certificate {
  CertKind kind = CertKind::Expansion;
  PhasePoint base;
  Real t = 0;
  TangentVector seed;
  Real ratio = 0;
  Real target_L = 0;
  long event_index = -1;  // index of the collision the seed was planted at
};

enum class SearchStatus { Found, BudgetExhausted, HypothesisUnmet };

struct CertificateSearch {
  SearchStatus status = SearchStatus::BudgetExhausted;
  std::optional<Certificate> certificate;
  std::string detail;
  Real epsilon_gap = 0;  // smallest inter-collision gap seen on the segment
};

struct CertificateOptions {
  long richness_window = 100;  // at least one connected block per this many events
  FlowOptions flow;
};

// Scans the backward orbit of x0 for a collision with relative speed above
// the fast-collision threshold, far enough in the past that the linear
// expansion estimate exceeds L; plants a flat in-plane seed on the midpoint
// of the flight entering that collision and measures the forward expansion
// back to x0.
CertificateSearch expansion_certificate(const SystemParams& p,
                                        const PhasePoint& x0, Real L,
                                        long budget,
                                        const CertificateOptions& opts = {});

// Time-reversal dual: a stable-cone vector at x0 whose forward image after
// time t has contracted below 1/L.
CertificateSearch contraction_certificate(const SystemParams& p,
                                          const PhasePoint& x0, Real L,
                                          long budget,
                                          const CertificateOptions& opts = {});

struct VerifyResult {
  Real ratio = 0;       // freshly measured by re-simulation from the base
  bool ratio_matches = false;  // within 1e-9 (relative) of the stored value
  bool threshold_met = false;  // > L resp. < 1/L
};

// Independent re-check: re-simulates from cert.base for cert.t and
// re-propagates cert.seed.
VerifyResult verify_certificate(const SystemParams& p, const Certificate& cert);

// Structured text record carrying everything needed for third-party
// re-verification (system, base state, seed, t, ratio, L, event index).
std::string serialize_certificate(const SystemParams& p, const Certificate& cert);
Certificate parse_certificate(const SystemParams& p, const std::string& text);

}  // namespace hardball
