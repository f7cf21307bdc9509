#pragma once

#include "hardball/phase.hpp"
#include "hardball/system.hpp"
#include "hardball/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace hardball {

enum class ExperimentKind {
  Simulate,
  VerifyQ,
  VerifyProp35,
  VerifyLemma310,
  VerifyCor312,
  Certificate,
  Estimates,
};

const char* kind_name(ExperimentKind k);
ExperimentKind kind_from_name(const std::string& name);

// Fully resolved experiment description.  Identical configs (including the
// seed) produce byte-identical outputs.
struct ExperimentConfig {
  // [system]
  int balls = 3;
  int dimension = 2;
  Real radius = 0.1;
  Vec masses;  // defaults to unit masses when absent
  ToleranceSet tolerances;

  // [experiment]
  ExperimentKind kind = ExperimentKind::Simulate;
  std::uint64_t seed = 0;
  long collisions = 1000;
  Real L = 100.0;   // certificate target
  Real a = 0.05;    // initial relative-speed cap for verify-lemma310
  std::string output_dir = "out";
  bool quiet = false;

  SystemParams system() const;
};

// Flat key/section text format ([system], [experiment]); see docs/config.md.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Rejection-samples admissible positions uniformly on the torus, draws
// isotropic velocities and applies the standard normalization.
// Deterministic per seed; throws SamplingFailed when the packing does not
// admit a placement within the retry budget.
PhasePoint generate_state(const SystemParams& p, std::uint64_t seed);

// Near-comoving preparation: velocities c + u_i with |u_i| <= a/2, so every
// pairwise relative speed is at most `a`.  Intentionally not normalized.
PhasePoint generate_comoving_state(const SystemParams& p, std::uint64_t seed,
                                   Real a);

// Exit codes: 0 all checks pass, 1 a verified property was violated,
// 2 singular orbit, 3 hypothesis unmet / budget exhausted, 4 config error.
int run_experiment(const ExperimentConfig& config);

}  // namespace hardball
