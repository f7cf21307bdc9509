#pragma once

#include "hardball/types.hpp"

#include <string>

namespace hardball {

// Shortest-exact decimal form (18 significant digits); round-trips doubles
// and keeps reports byte-stable across runs.
std::string fmt_real(Real x);

// Space-separated list of fmt_real values.
std::string fmt_vec(const Eigen::Ref<const Vec>& v);

// Flattened compound vector, ball-major.
std::string fmt_ball_array(const BallArray& a);

// Inverse of fmt_vec; throws ConfigError on malformed input or when `expect`
// (>= 0) entries were demanded but a different count was found.
Vec parse_vec(const std::string& text, Index expect = -1);

}  // namespace hardball
