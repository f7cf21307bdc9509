#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>

namespace hardball {

using Real = double;
using Index = Eigen::Index;

// Flat column vectors / dense matrices in compound coordinates (length N*nu).
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Per-ball storage: `dim` rows, one column per ball.  Column-major, so the
// flattened view (ball-major) is a contiguous compound vector.
using BallArray = Eigen::MatrixXd;

inline Eigen::Map<const Vec> flat(const BallArray& a) {
  return Eigen::Map<const Vec>(a.data(), a.size());
}

inline BallArray unflat(const Eigen::Ref<const Vec>& w, Index dim, Index balls) {
  return Eigen::Map<const BallArray>(w.data(), dim, balls);
}

// Unordered ball pair, stored normalized with i < j (zero-based labels).
struct BallPair {
  int i = 0;
  int j = 1;

  static BallPair of(int a, int b) {
    return a < b ? BallPair{a, b} : BallPair{b, a};
  }
  friend bool operator==(const BallPair&, const BallPair&) = default;
  friend auto operator<=>(const BallPair&, const BallPair&) = default;
};

}  // namespace hardball
