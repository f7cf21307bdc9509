#pragma once

#include <stdexcept>
#include <string>

namespace hardball {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A function was called outside its contract (dimension mismatch, skipped
// collision, ...).  Always indicates a caller bug, never bad input data.
struct ContractViolation : Error {
  using Error::Error;
};

struct InadmissibleConfiguration : Error {
  using Error::Error;
};

struct ZeroEnergy : Error {
  using Error::Error;
};

// Near-tangential or near-multiple collision: the orbit entered the
// neighbourhood of the singularity set and the run is aborted.
struct SingularOrbit : Error {
  using Error::Error;
};

struct CollisionFlood : Error {
  using Error::Error;
};

struct NotInContact : Error {
  using Error::Error;
};

struct Receding : Error {
  using Error::Error;
};

struct Grazing : Error {
  using Error::Error;
};

struct DegenerateSpan : Error {
  using Error::Error;
};

struct ZeroRelativeVelocity : Error {
  using Error::Error;
};

struct NoConvergence : Error {
  using Error::Error;
};

struct HypothesisUnmet : Error {
  using Error::Error;
};

struct SamplingFailed : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace hardball
