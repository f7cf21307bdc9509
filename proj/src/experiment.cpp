#include "hardball/experiment.hpp"

#include "hardball/errors.hpp"
#include "hardball/estimates.hpp"
#include "hardball/flow.hpp"
#include "hardball/graphs.hpp"
#include "hardball/io.hpp"
#include "hardball/random.hpp"
#include "hardball/subspaces.hpp"
#include "hardball/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <vector>

namespace hardball {

namespace {

constexpr int kSeedCount = 100;       // tangent seeds / sub-runs per suite
constexpr int kPlantedSeeds = 50;     // in-plane seeds for the expansion suite

struct CheckLine {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct SuiteOutput {
  std::vector<CheckLine> checks;
  std::vector<std::pair<std::string, std::string>> files;  // name -> content
  int exit_override = -1;  // set for singular / hypothesis outcomes
  std::string note;
};

void add_check(SuiteOutput& out, const std::string& name, bool pass,
               const std::string& detail) {
  out.checks.push_back({name, pass, detail});
}

}  // namespace

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::VerifyQ: return "verify-q";
    case ExperimentKind::VerifyProp35: return "verify-prop35";
    case ExperimentKind::VerifyLemma310: return "verify-lemma310";
    case ExperimentKind::VerifyCor312: return "verify-cor312";
    case ExperimentKind::Certificate: return "certificate";
    case ExperimentKind::Estimates: return "estimates";
  }
  return "?";
}

ExperimentKind kind_from_name(const std::string& name) {
  for (ExperimentKind k :
       {ExperimentKind::Simulate, ExperimentKind::VerifyQ,
        ExperimentKind::VerifyProp35, ExperimentKind::VerifyLemma310,
        ExperimentKind::VerifyCor312, ExperimentKind::Certificate,
        ExperimentKind::Estimates})
    if (name == kind_name(k)) return k;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

SystemParams ExperimentConfig::system() const {
  Vec m = masses.size() ? masses : Vec::Ones(balls);
  return SystemParams::create(balls, dimension, radius, std::move(m), tolerances);
}

// ---------------------------------------------------------------------------
// configuration text format
// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Real parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    Real x = std::stod(value, &pos);
    if (trim(value.substr(pos)).empty()) return x;
  } catch (...) {
  }
  throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    long x = std::stol(value, &pos);
    if (trim(value.substr(pos)).empty()) return x;
  } catch (...) {
  }
  throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  bool have_kind = false;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    std::string line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header: '" + raw + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "system" && section != "experiment")
        throw ConfigError("unknown section '[" + section + "]'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value', got '" + raw + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("empty key or value in '" + raw + "'");

    if (section == "system") {
      if (key == "balls") cfg.balls = static_cast<int>(parse_long(key, value));
      else if (key == "dimension") cfg.dimension = static_cast<int>(parse_long(key, value));
      else if (key == "radius") cfg.radius = parse_real(key, value);
      else if (key == "masses") cfg.masses = parse_vec(value);
      else if (key == "contact_tol") cfg.tolerances.contact_tol = parse_real(key, value);
      else if (key == "singular_gap") cfg.tolerances.singular_gap = parse_real(key, value);
      else if (key == "grazing_cos") cfg.tolerances.grazing_cos = parse_real(key, value);
      else if (key == "conservation_tol") cfg.tolerances.conservation_tol = parse_real(key, value);
      else throw ConfigError("unknown [system] key '" + key + "'");
    } else if (section == "experiment") {
      if (key == "kind") {
        cfg.kind = kind_from_name(value);
        have_kind = true;
      } else if (key == "seed") {
        try {
          cfg.seed = std::stoull(value);
        } catch (...) {
          throw ConfigError("key 'seed': expected an unsigned integer");
        }
      } else if (key == "collisions") cfg.collisions = parse_long(key, value);
      else if (key == "L") cfg.L = parse_real(key, value);
      else if (key == "a") cfg.a = parse_real(key, value);
      else if (key == "output_dir") cfg.output_dir = value;
      else throw ConfigError("unknown [experiment] key '" + key + "'");
    } else {
      throw ConfigError("key '" + key + "' outside any section");
    }
  }
  if (!have_kind) throw ConfigError("missing required key: [experiment] kind");
  if (cfg.collisions <= 0) throw ConfigError("collisions must be positive");
  if (!(cfg.L > 0)) throw ConfigError("L must be positive");
  if (!(cfg.a > 0)) throw ConfigError("a must be positive");
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// state generators
// ---------------------------------------------------------------------------

namespace {

BallArray sample_positions(const SystemParams& p, SeedStream& rng) {
  BallArray q(p.dim, p.ball_count);
  const long max_tries = 10000L * p.ball_count;
  long tries = 0;
  for (int i = 0; i < p.ball_count; ++i) {
    while (true) {
      if (++tries > max_tries)
        throw SamplingFailed("position sampling: packing too dense");
      for (int c = 0; c < p.dim; ++c) q(c, i) = rng.uniform();
      bool clear = true;
      for (int j = 0; j < i && clear; ++j)
        clear = min_image_delta(q.col(i), q.col(j)).norm() > 2 * p.radius + 1e-9;
      if (clear) break;
    }
  }
  return q;
}

}  // namespace

PhasePoint generate_state(const SystemParams& p, std::uint64_t seed) {
  SeedStream rng(seed);
  BallArray q = sample_positions(p, rng);
  BallArray v(p.dim, p.ball_count);
  for (int i = 0; i < p.ball_count; ++i)
    for (int c = 0; c < p.dim; ++c) v(c, i) = rng.gaussian();
  return normalize_state(p, q, v);
}

PhasePoint generate_comoving_state(const SystemParams& p, std::uint64_t seed,
                                   Real a) {
  if (!(a > 0)) throw ContractViolation("generate_comoving_state: a must be > 0");
  SeedStream rng(seed);
  BallArray q = sample_positions(p, rng);
  Vec drift = rng.gaussian_vec(p.dim);
  BallArray v(p.dim, p.ball_count);
  for (int i = 0; i < p.ball_count; ++i) {
    Vec dir = rng.gaussian_vec(p.dim);
    dir.normalize();
    const Real radius = 0.5 * a * std::pow(rng.uniform(), 1.0 / p.dim);
    v.col(i) = drift + radius * dir;
  }
  return {std::move(q), std::move(v)};
}

// ---------------------------------------------------------------------------
// suites
// ---------------------------------------------------------------------------

namespace {

TangentVector random_tangent_vector(const SystemParams& p, const PhasePoint& x,
                                    SeedStream& rng, bool nonnegative_q) {
  TangentVector w;
  w.dq = unflat(rng.gaussian_vec(static_cast<Index>(p.dim) * p.ball_count),
                p.dim, p.ball_count);
  w.dv = unflat(rng.gaussian_vec(static_cast<Index>(p.dim) * p.ball_count),
                p.dim, p.ball_count);
  w.dq = remove_translation(p, w.dq);
  w.dv = remove_translation(p, w.dv);
  const Real vv = mass_inner(p, x.v, x.v);
  w.dv -= (mass_inner(p, x.v, w.dv) / vv) * x.v;
  if (nonnegative_q && lyapunov_form(p, w) < 0) w.dv = -w.dv;
  const Real norm = phase_norm(p, w.dq, w.dv);
  w.dq /= norm;
  w.dv /= norm;
  return w;
}

std::string segment_csv(const TrajectorySegment& seg) {
  std::ostringstream os;
  write_events_csv(os, seg);
  return os.str();
}

SuiteOutput suite_simulate(const ExperimentConfig& cfg, const SystemParams& p) {
  SuiteOutput out;
  PhasePoint x0 = generate_state(p, cfg.seed);
  TrajectorySegment seg =
      simulate(p, x0, StopRule::after_collisions(cfg.collisions));

  const Real e_drift = std::abs(kinetic_energy(p, seg.x_end) - 0.5);
  const Real i_drift = total_momentum(p, seg.x_end).norm();
  Real min_gap = std::numeric_limits<Real>::infinity();
  for (std::size_t l = 1; l < seg.events.size(); ++l)
    min_gap = std::min(min_gap, seg.events[l].dt_flight);

  add_check(out, "energy_conservation", e_drift <= p.tol.conservation_tol,
            "|E-1/2| = " + fmt_real(e_drift));
  add_check(out, "momentum_conservation", i_drift <= p.tol.conservation_tol,
            "|I| = " + fmt_real(i_drift));
  add_check(out, "event_separation", min_gap >= p.tol.singular_gap,
            "min_gap = " + fmt_real(min_gap));
  out.files.emplace_back("events.csv", segment_csv(seg));
  return out;
}

SuiteOutput suite_verify_q(const ExperimentConfig& cfg, const SystemParams& p) {
  SuiteOutput out;
  PhasePoint x0 = generate_state(p, cfg.seed);
  TrajectorySegment seg =
      simulate(p, x0, StopRule::after_collisions(cfg.collisions));

  Real min_monotone_slack = std::numeric_limits<Real>::infinity();
  Real max_flight_increment_err = 0;
  Real min_ratio_slack = std::numeric_limits<Real>::infinity();
  Real max_reproject = 0;
  std::string trace_csv;

  for (int k = 0; k < kSeedCount; ++k) {
    SeedStream rng(SeedStream::substream(cfg.seed, 1000 + k));
    TangentVector w0 = random_tangent_vector(p, x0, rng, true);
    TangentTrace trace = propagate_along(p, w0, seg);
    max_reproject = std::max(max_reproject, trace.max_reproject_residual);
    if (k == 0) {
      std::ostringstream os;
      write_tangent_trace_csv(os, trace);
      trace_csv = os.str();
    }

    for (std::size_t s = 1; s < trace.samples.size(); ++s) {
      const TangentSample& s1 = trace.samples[s - 1];
      const TangentSample& s2 = trace.samples[s];
      const Real factor = std::exp(2 * (s2.log_scale - s1.log_scale));
      min_monotone_slack =
          std::min(min_monotone_slack, s2.q_value * factor - s1.q_value);
      if (s1.norm_dq > 0 && s2.norm_dq > 0) {
        const Real rfactor = std::exp(s2.log_scale - s1.log_scale);
        min_ratio_slack =
            std::min(min_ratio_slack, (s2.q_value / s2.norm_dq) * rfactor -
                                          s1.q_value / s1.norm_dq);
      }
      const bool same_leg = s1.log_scale == s2.log_scale &&
                            !(s1.side == SampleSide::Pre &&
                              s2.side == SampleSide::Post);
      if (same_leg && s2.t > s1.t) {
        const Real predicted = (s2.t - s1.t) * s1.norm_dv * s1.norm_dv;
        max_flight_increment_err = std::max(
            max_flight_increment_err,
            std::abs((s2.q_value - s1.q_value) - predicted));
      }
    }
  }

  add_check(out, "q_monotone", min_monotone_slack >= -1e-10,
            "min_slack = " + fmt_real(min_monotone_slack));
  add_check(out, "flight_increment_identity", max_flight_increment_err <= 1e-12,
            "max_err = " + fmt_real(max_flight_increment_err));
  add_check(out, "q_over_dq_monotone", min_ratio_slack >= -1e-10,
            "min_slack = " + fmt_real(min_ratio_slack));
  add_check(out, "reprojection_residual", max_reproject <= 1e-10,
            "max_residual = " + fmt_real(max_reproject));
  out.files.emplace_back("events.csv", segment_csv(seg));
  out.files.emplace_back("tangent_trace.csv", std::move(trace_csv));
  return out;
}

// Sub-segment that starts exactly at the contact of event `l` (pre-collision
// side) and continues to the end of `seg`.
TrajectorySegment tail_from_event(const SystemParams&,
                                  const TrajectorySegment& seg, std::size_t l,
                                  const PhasePoint& contact_state) {
  TrajectorySegment tail;
  tail.x0 = contact_state;
  Real t0 = seg.events[l].t;
  for (std::size_t m = l; m < seg.events.size(); ++m) {
    CollisionEvent ev = seg.events[m];
    ev.dt_flight = m == l ? 0 : ev.dt_flight;
    ev.t = m == l ? 0 : ev.t - t0;
    tail.events.push_back(std::move(ev));
  }
  tail.final_flight_dt = seg.final_flight_dt;
  tail.t_end = seg.t_end - t0;
  tail.x_end = seg.x_end;
  return tail;
}

SuiteOutput suite_verify_prop35(const ExperimentConfig& cfg,
                                const SystemParams& p) {
  SuiteOutput out;
  PhasePoint x0 = generate_state(p, cfg.seed);
  // twice the budget so that every planted seed sees ~`collisions` events
  TrajectorySegment seg =
      simulate(p, x0, StopRule::after_collisions(2 * cfg.collisions));

  // walk the orbit once, capturing contact states for the seed events
  std::vector<PhasePoint> contacts(seg.events.size());
  {
    std::size_t idx = 0;
    replay_segment(
        p, seg, nullptr,
        [&](const PhasePoint& x, const CollisionEvent&) { contacts[idx++] = x; });
  }

  long planted = 0, skipped_degenerate = 0, violations = 0;
  Real min_slack = std::numeric_limits<Real>::infinity();
  Real min_curvature_margin = std::numeric_limits<Real>::infinity();
  const std::size_t first_half =
      std::min<std::size_t>(seg.events.size(), cfg.collisions);
  const std::size_t stride = std::max<std::size_t>(1, first_half / kPlantedSeeds);

  for (std::size_t l = 0; l < first_half && planted < kPlantedSeeds;
       l += stride) {
    TangentVector seed;
    try {
      seed = collision_plane_seed(p, contacts[l], seg.events[l].pair);
    } catch (const DegenerateSpan&) {
      ++skipped_degenerate;
      continue;
    }
    TrajectorySegment tail = tail_from_event(p, seg, l, contacts[l]);
    TangentTrace trace = propagate_along(p, seed, tail);

    // trace layout: [start, pre, post, ...]; the hypothesis holds from the
    // post-collision sample onward
    const TangentSample& post = trace.samples.at(2);
    const Real c0 = post.q_value / (post.norm_dq * post.norm_dq);
    min_curvature_margin = std::min(
        min_curvature_margin,
        c0 - curvature_lower_bound(seg.events[l], p));

    std::vector<TangentSample> from_post(trace.samples.begin() + 2,
                                         trace.samples.end());
    LinearExpansionReport rep = check_linear_expansion(from_post, c0);
    min_slack = std::min(min_slack, rep.min_slack);
    violations += rep.violations;
    ++planted;
  }

  add_check(out, "seed_count", planted >= kPlantedSeeds,
            "planted = " + std::to_string(planted) +
                ", degenerate_skipped = " + std::to_string(skipped_degenerate));
  add_check(out, "linear_expansion", violations == 0,
            "violations = " + std::to_string(violations) +
                ", min_slack = " + fmt_real(min_slack));
  add_check(out, "curvature_floor", min_curvature_margin >= -1e-9,
            "min_margin = " + fmt_real(min_curvature_margin));
  out.files.emplace_back("events.csv", segment_csv(seg));
  return out;
}

SuiteOutput suite_verify_lemma310(const ExperimentConfig& cfg,
                                  const SystemParams& p) {
  SuiteOutput out;
  const MassMultiset ms = MassMultiset::of(p.masses);
  const Real bound = max_relative_speed_bound(cfg.a, ms);

  Real max_excess = -std::numeric_limits<Real>::infinity();
  Real max_initial = 0;
  long runs = 0;

  for (int k = 0; k < kSeedCount; ++k) {
    PhasePoint x0 =
        generate_comoving_state(p, SeedStream::substream(cfg.seed, k), cfg.a);
    Real max_speed = 0;
    auto scan_speeds = [&](const PhasePoint& x) {
      for (int i = 0; i < p.ball_count; ++i)
        for (int j = i + 1; j < p.ball_count; ++j)
          max_speed = std::max(max_speed, (x.v.col(i) - x.v.col(j)).norm());
    };
    scan_speeds(x0);
    max_initial = std::max(max_initial, max_speed);
    TrajectorySegment seg =
        simulate(p, x0, StopRule::after_collisions(cfg.collisions));
    replay_segment(p, seg, nullptr,
                   [&](const PhasePoint& x, const CollisionEvent& ev) {
                     scan_speeds(resolve_collision(p, x, ev.pair, ev.normal));
                   });
    max_excess = std::max(max_excess, max_speed - bound);
    ++runs;
  }

  add_check(out, "initial_speeds_within_a", max_initial <= cfg.a,
            "max_initial = " + fmt_real(max_initial) +
                ", a = " + fmt_real(cfg.a));
  add_check(out, "relative_speed_envelope", max_excess <= 1e-12,
            "max_excess = " + fmt_real(max_excess) +
                " over bound " + fmt_real(bound) +
                " in " + std::to_string(runs) + " runs");
  return out;
}

SuiteOutput suite_verify_cor312(const ExperimentConfig& cfg,
                                const SystemParams& p) {
  SuiteOutput out;
  const MassMultiset ms = MassMultiset::of(p.masses);
  const Real threshold = fast_collision_threshold(ms);

  long connected_runs = 0, threshold_hits = 0, never_connected = 0;
  Real min_peak = std::numeric_limits<Real>::infinity();
  Real max_prop_excess = -std::numeric_limits<Real>::infinity();

  for (int k = 0; k < kSeedCount; ++k) {
    PhasePoint x0 = generate_state(p, SeedStream::substream(cfg.seed, k));
    TrajectorySegment seg =
        simulate(p, x0, StopRule::after_collisions(cfg.collisions));
    CollisionSequence seq = CollisionSequence::from_segment(p, seg);
    auto prefix = first_connected_prefix(seq);
    if (!prefix) {
      ++never_connected;
      continue;
    }
    ++connected_runs;

    // trim to the first connected prefix
    Real peak = 0;
    for (std::size_t l = 0; l < prefix->k; ++l)
      peak = std::max(peak, seg.events[l].rel_speed);
    min_peak = std::min(min_peak, peak);
    if (peak >= threshold) ++threshold_hits;

    // recursive-bound property: with a = the largest collision speed of the
    // connected prefix, every relative speed within its window stays below
    // the connected-orbit bound
    const Real f_bound = connected_orbit_speed_bound(peak, ms);
    Real max_speed = 0;
    std::size_t idx = 0;
    auto scan = [&](const PhasePoint& x) {
      for (int i = 0; i < p.ball_count; ++i)
        for (int j = i + 1; j < p.ball_count; ++j)
          max_speed = std::max(max_speed, (x.v.col(i) - x.v.col(j)).norm());
    };
    scan(x0);
    replay_segment(p, seg, nullptr,
                   [&](const PhasePoint& x, const CollisionEvent& ev) {
                     if (idx < prefix->k) scan(resolve_collision(p, x, ev.pair, ev.normal));
                     ++idx;
                   });
    max_prop_excess = std::max(max_prop_excess, max_speed - f_bound);
  }

  add_check(out, "prefixes_connected", never_connected == 0,
            "never_connected = " + std::to_string(never_connected) +
                " of " + std::to_string(kSeedCount));
  add_check(out, "fast_collision_present",
            connected_runs > 0 && threshold_hits == connected_runs,
            "hits = " + std::to_string(threshold_hits) + "/" +
                std::to_string(connected_runs) +
                ", min_peak = " + fmt_real(min_peak) +
                ", threshold = " + fmt_real(threshold));
  add_check(out, "connected_orbit_bound_holds", max_prop_excess <= 1e-9,
            "max_excess = " + fmt_real(max_prop_excess));
  return out;
}

SuiteOutput suite_certificate(const ExperimentConfig& cfg,
                              const SystemParams& p) {
  SuiteOutput out;
  PhasePoint x0 = generate_state(p, cfg.seed);

  CertificateSearch exp_search =
      expansion_certificate(p, x0, cfg.L, cfg.collisions);
  CertificateSearch con_search =
      contraction_certificate(p, x0, cfg.L, cfg.collisions);

  if (exp_search.status != SearchStatus::Found ||
      con_search.status != SearchStatus::Found) {
    out.exit_override = 3;
    out.note = "certificate search incomplete: expansion='" +
               exp_search.detail + "' contraction='" + con_search.detail + "'";
    add_check(out, "expansion_found",
              exp_search.status == SearchStatus::Found, exp_search.detail);
    add_check(out, "contraction_found",
              con_search.status == SearchStatus::Found, con_search.detail);
    return out;
  }
  const Certificate& ce = *exp_search.certificate;
  const Certificate& cc = *con_search.certificate;

  add_check(out, "expansion_found", true,
            "ratio = " + fmt_real(ce.ratio) + ", t = " + fmt_real(ce.t) +
                ", event = " + std::to_string(ce.event_index));
  add_check(out, "contraction_found", true,
            "ratio = " + fmt_real(cc.ratio) + ", t = " + fmt_real(cc.t));

  VerifyResult ve = verify_certificate(p, ce);
  VerifyResult vc = verify_certificate(p, cc);
  add_check(out, "expansion_reverified", ve.ratio_matches && ve.threshold_met,
            "ratio = " + fmt_real(ve.ratio));
  add_check(out, "contraction_reverified", vc.ratio_matches && vc.threshold_met,
            "ratio = " + fmt_real(vc.ratio));

  // duality: the contracting vector is the mirrored expanding vector of the
  // reversed base point, so the two measured ratios are reciprocal
  CertificateSearch dual =
      expansion_certificate(p, time_reverse(x0), cfg.L, cfg.collisions);
  bool duality_ok = false;
  Real duality_err = std::numeric_limits<Real>::infinity();
  if (dual.status == SearchStatus::Found) {
    duality_err = std::abs(cc.ratio * dual.certificate->ratio - 1);
    duality_ok = duality_err <= 1e-10;
  }
  add_check(out, "duality_identity", duality_ok,
            "|ratio_c * ratio_e - 1| = " + fmt_real(duality_err));

  const Real q_seed = lyapunov_form(p, cc.seed);
  add_check(out, "contraction_seed_in_stable_cone", q_seed < 0,
            "Q(seed) = " + fmt_real(q_seed));

  out.files.emplace_back("certificates.txt", serialize_certificate(p, ce) +
                                                 serialize_certificate(p, cc));
  return out;
}

SuiteOutput suite_estimates(const ExperimentConfig& cfg, const SystemParams& p) {
  SuiteOutput out;
  (void)cfg;
  const MassMultiset ms = MassMultiset::of(p.masses);
  const Real f1 = speed_bound_coefficient(ms);
  const Real g = fast_collision_threshold(ms);
  const Real g_bisect = fast_collision_threshold_bisect(ms);
  const Real envelope = max_relative_speed_bound(1, ms);
  const Real target = 1 / std::sqrt(ms.total);

  add_check(out, "f_unit", true, "f(1) = " + fmt_real(f1));
  add_check(out, "threshold_G", connected_orbit_speed_bound(g, ms) < target,
            "G = " + fmt_real(g) + ", f(G) = " +
                fmt_real(connected_orbit_speed_bound(g, ms)) +
                " < M^{-1/2} = " + fmt_real(target));
  add_check(out, "threshold_bisect_agrees",
            std::abs(g - g_bisect) <= 1e-12 * std::max<Real>(1, g),
            "G_bisect = " + fmt_real(g_bisect));
  add_check(out, "speed_envelope_factor", true,
            "2*sqrt(M/m_min) = " + fmt_real(envelope));
  return out;
}

std::string build_report(const ExperimentConfig& cfg, const SystemParams& p,
                         const SuiteOutput& out, int exit_code) {
  std::ostringstream os;
  os << "hardball experiment report\n";
  os << "kind: " << kind_name(cfg.kind) << '\n';
  os << "seed: " << cfg.seed << '\n';
  os << "balls: " << cfg.balls << '\n';
  os << "dimension: " << cfg.dimension << '\n';
  os << "radius: " << fmt_real(cfg.radius) << '\n';
  os << "masses: " << fmt_vec(p.masses) << '\n';
  os << "collisions: " << cfg.collisions << '\n';
  os << "L: " << fmt_real(cfg.L) << '\n';
  os << "a: " << fmt_real(cfg.a) << '\n';
  os << "tolerances: contact_tol=" << fmt_real(p.tol.contact_tol)
     << " singular_gap=" << fmt_real(p.tol.singular_gap)
     << " grazing_cos=" << fmt_real(p.tol.grazing_cos)
     << " conservation_tol=" << fmt_real(p.tol.conservation_tol) << '\n';
  os << "----\n";
  for (const CheckLine& c : out.checks)
    os << "check " << c.name << ": " << (c.pass ? "PASS" : "FAIL") << " ("
       << c.detail << ")\n";
  if (!out.note.empty()) os << "note: " << out.note << '\n';
  os << "----\n";
  os << "result: " << (exit_code == 0 ? "PASS" : "FAIL") << '\n';
  os << "exit_code: " << exit_code << '\n';
  return os.str();
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
  const SystemParams p = cfg.system();

  SuiteOutput out;
  int exit_code = 0;
  try {
    switch (cfg.kind) {
      case ExperimentKind::Simulate: out = suite_simulate(cfg, p); break;
      case ExperimentKind::VerifyQ: out = suite_verify_q(cfg, p); break;
      case ExperimentKind::VerifyProp35: out = suite_verify_prop35(cfg, p); break;
      case ExperimentKind::VerifyLemma310: out = suite_verify_lemma310(cfg, p); break;
      case ExperimentKind::VerifyCor312: out = suite_verify_cor312(cfg, p); break;
      case ExperimentKind::Certificate: out = suite_certificate(cfg, p); break;
      case ExperimentKind::Estimates: out = suite_estimates(cfg, p); break;
    }
    for (const CheckLine& c : out.checks)
      if (!c.pass) exit_code = 1;
    if (out.exit_override >= 0) exit_code = out.exit_override;
  } catch (const SingularOrbit& e) {
    out.note = std::string("singular orbit: ") + e.what();
    exit_code = 2;
  } catch (const HypothesisUnmet& e) {
    out.note = std::string("hypothesis unmet: ") + e.what();
    exit_code = 3;
  }

  const std::string report = build_report(cfg, p, out, exit_code);

  std::filesystem::create_directories(cfg.output_dir);
  for (const auto& [name, content] : out.files) {
    std::ofstream f(std::filesystem::path(cfg.output_dir) / name,
                    std::ios::binary);
    f << content;
  }
  {
    std::ofstream f(std::filesystem::path(cfg.output_dir) / "report.txt",
                    std::ios::binary);
    f << report;
  }

  if (!cfg.quiet) std::cout << report;
  return exit_code;
}

}  // namespace hardball
