#include "hardball/graphs.hpp"

#include "hardball/errors.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>

namespace hardball {

namespace {

struct UnionFind {
  std::vector<int> parent;
  int components;

  explicit UnionFind(int n) : parent(n), components(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent[b] = a;
      --components;
    }
  }
};

}  // namespace

CollisionSequence CollisionSequence::from_segment(const SystemParams& p,
                                                  const TrajectorySegment& seg) {
  CollisionSequence seq;
  seq.ball_count = p.ball_count;
  seq.labels.reserve(seg.events.size());
  seq.times.reserve(seg.events.size());
  for (const CollisionEvent& ev : seg.events) {
    seq.labels.push_back(ev.pair);
    seq.times.push_back(ev.t);
  }
  return seq;
}

CollisionSequence CollisionSequence::from_events_csv(int ball_count,
                                                     std::istream& in) {
  CollisionSequence seq;
  seq.ball_count = ball_count;
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,i,j", 0) != 0)
    throw ConfigError("events CSV: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Real t, rel, cphi;
    int i, j;
    if (!(row >> t >> i >> j >> rel >> cphi))
      throw ConfigError("events CSV: malformed row '" + line + "'");
    if (i < 1 || j < 1 || i > ball_count || j > ball_count || i == j)
      throw ConfigError("events CSV: ball label out of range");
    seq.labels.push_back(BallPair::of(i - 1, j - 1));
    seq.times.push_back(t);
  }
  return seq;
}

CollisionGraph CollisionGraph::from_range(const CollisionSequence& seq,
                                          std::size_t first, std::size_t last) {
  if (first > last || last > seq.size())
    throw ContractViolation("collision graph range out of bounds");
  CollisionGraph g;
  g.ball_count = seq.ball_count;
  g.edges.assign(seq.labels.begin() + first, seq.labels.begin() + last);
  return g;
}

bool CollisionGraph::connected() const {
  UnionFind uf(ball_count);
  for (const BallPair& e : edges) uf.unite(e.i, e.j);
  return uf.components == 1;
}

bool is_connected(const CollisionSequence& seq, std::size_t first,
                  std::size_t last) {
  return CollisionGraph::from_range(seq, first, last).connected();
}

std::vector<std::size_t> richness_blocks(const CollisionSequence& seq) {
  std::vector<std::size_t> bounds;
  UnionFind uf(seq.ball_count);
  for (std::size_t l = 0; l < seq.size(); ++l) {
    uf.unite(seq.labels[l].i, seq.labels[l].j);
    if (uf.components == 1) {
      bounds.push_back(l + 1);
      uf = UnionFind(seq.ball_count);
    }
  }
  return bounds;
}

int richness(const CollisionSequence& seq) {
  return static_cast<int>(richness_blocks(seq).size());
}

std::optional<ConnectedPrefix> first_connected_prefix(const CollisionSequence& seq) {
  UnionFind uf(seq.ball_count);
  for (std::size_t l = 0; l < seq.size(); ++l) {
    const BallPair e = seq.labels[l];
    uf.unite(e.i, e.j);
    if (uf.components == 1) {
      // The connecting edge merged exactly two components; recover them with
      // a fresh pass over the (l)-prefix.
      ConnectedPrefix out;
      out.k = l + 1;
      UnionFind pre(seq.ball_count);
      for (std::size_t m = 0; m < l; ++m) pre.unite(seq.labels[m].i, seq.labels[m].j);
      const int ra = pre.find(e.i);
      for (int b = 0; b < seq.ball_count; ++b)
        (pre.find(b) == ra ? out.component_a : out.component_b).push_back(b);
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace hardball
