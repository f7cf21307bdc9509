#pragma once

#include "hardball/flow.hpp"
#include "hardball/types.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace hardball {

// Time-ordered symbolic collision sequence.
struct CollisionSequence {
  int ball_count = 0;
  std::vector<BallPair> labels;
  std::vector<Real> times;

  static CollisionSequence from_segment(const SystemParams& p,
                                        const TrajectorySegment& seg);
  // Ingests the flow module's events CSV (1-based labels).
  static CollisionSequence from_events_csv(int ball_count, std::istream& in);

  std::size_t size() const { return labels.size(); }
};

// Graph on {0..N-1} whose edges are the colliding pairs of a subsequence.
struct CollisionGraph {
  int ball_count = 0;
  std::vector<BallPair> edges;

  static CollisionGraph from_range(const CollisionSequence& seq,
                                   std::size_t first, std::size_t last);
  bool connected() const;
};

// True iff the collision graph of seq[first, last) is connected.
bool is_connected(const CollisionSequence& seq, std::size_t first,
                  std::size_t last);

// Greedy earliest-closing decomposition into consecutive connected blocks;
// returns the number of closed blocks.  This maximizes the block count, so
// the result is the largest C for which the sequence is C-rich.
int richness(const CollisionSequence& seq);

// Block boundaries of the greedy decomposition: end index (exclusive) of
// every closed block.
std::vector<std::size_t> richness_blocks(const CollisionSequence& seq);

struct ConnectedPrefix {
  std::size_t k = 0;                 // 1-based count: prefix seq[0, k) is connected
  std::vector<int> component_a;      // the two components just before edge k
  std::vector<int> component_b;
};

// Least k whose prefix graph is connected, along with the bipartition of the
// vertex set into the two components of the (k-1)-prefix; nullopt when the
// whole sequence never connects the graph.
std::optional<ConnectedPrefix> first_connected_prefix(const CollisionSequence& seq);

}  // namespace hardball
