#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pardpp/element_set.hpp"
#include "pardpp/numerics.hpp"
#include "pardpp/samplers.hpp"

namespace pardpp {

using GraphEdge = std::pair<int, int>;  // stored with first < second

// Simple undirected graph with a planar rotation system (cyclic neighbour
// order around every vertex).
class PlanarGraph {
 public:
  // Computes an embedding; throws NotPlanar.
  PlanarGraph(int n, std::vector<GraphEdge> edges);
  // Uses the given rotation system after checking Euler's formula per
  // connected component; throws NotPlanar if it fails.
  PlanarGraph(int n, std::vector<GraphEdge> edges, std::vector<std::vector<int>> rotation);

  static PlanarGraph grid(int rows, int cols);
  static PlanarGraph path(int n);
  static PlanarGraph cycle(int n);

  [[nodiscard]] int size() const { return n_; }
  [[nodiscard]] const std::vector<GraphEdge>& edges() const { return edges_; }
  [[nodiscard]] const std::vector<std::vector<int>>& rotation() const { return rotation_; }
  [[nodiscard]] const std::vector<int>& neighbors(int v) const { return rotation_[v]; }
  // Index into edges() of {u, v}, or -1.
  [[nodiscard]] int edge_index(int u, int v) const;

 private:
  void index_edges();

  int n_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<int>> rotation_;
  std::unordered_map<std::uint64_t, int> edge_lookup_;
};

// Graph file: "n m", m lines "u v", optionally a line "# rotation" followed by
// one line per vertex "v: w1 w2 ..." listing its neighbours in cyclic order.
// Other lines starting with '#' are comments.
PlanarGraph parse_graph(std::istream& in);
PlanarGraph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const PlanarGraph& graph, bool with_rotation = true);

// Faces of the embedding as closed walks of darts (u, v).
std::vector<std::vector<GraphEdge>> trace_faces(const PlanarGraph& graph);

// Pfaffian orientation: forward[e] means edges()[e] is directed first -> second.
struct KasteleynOrientation {
  std::vector<char> forward;
  std::vector<int> outer_faces;  // one face index per connected component
  // Skew-symmetric signed adjacency matrix.
  [[nodiscard]] Matrix signed_adjacency(const PlanarGraph& graph) const;
};

KasteleynOrientation kasteleyn_orientation(const PlanarGraph& graph);

// True when every face other than the outer ones has an odd number of edges
// directed along its boundary walk.
bool satisfies_face_parity(const PlanarGraph& graph, const KasteleynOrientation& orientation);

// Perfect-matching counts of induced subgraphs, sqrt|det| of the masked
// signed adjacency. Results are cached by vertex set; thread-safe.
class MatchingCounter {
 public:
  explicit MatchingCounter(const PlanarGraph& graph);

  [[nodiscard]] const PlanarGraph& graph() const { return graph_; }
  // Real-valued count for the subgraph induced by `vertices` (sorted). Exact
  // up to roundoff when the vertex set arises from deleting matched pairs.
  double count(const std::vector<int>& vertices);

 private:
  const PlanarGraph& graph_;
  Matrix signed_;
  std::mutex mutex_;
  std::unordered_map<ElementSet, double, ElementSetHash> cache_;
};

// Integer count of perfect matchings. Throws OddVertexCount, and
// InvariantViolation if sqrt|det| is not within 0.25 of an integer.
double count_matchings(const PlanarGraph& graph);

// Probability of each edge (v, u) incident to v, given a partial matching.
// Returns (u, p) for every neighbour u; already matched neighbours get 0.
// Throws NoPerfectMatching if the rest of the graph has no perfect matching.
std::vector<std::pair<int, double>> edge_marginal(const PlanarGraph& graph, int v,
                                                  std::span<const GraphEdge> matched);

struct Separator {
  std::vector<int> separator;
  std::vector<int> side1;
  std::vector<int> side2;
};

// Separator of the subgraph induced by `vertices`: no edge joins side1 and
// side2 and both hold at most 2/3 of the vertices. BFS levels first, then
// fundamental cycles of the BFS tree, then a greedy fallback.
Separator find_separator(const PlanarGraph& graph, const std::vector<int>& vertices);
Separator find_separator(const PlanarGraph& graph);

struct MatchingSample {
  std::vector<GraphEdge> edges;  // sorted
  RoundMeter meter;
};

// Uniform perfect matchings by separator recursion: separator vertices are
// matched one per adaptive round, disjoint components recurse in parallel
// (rounds combine by max).
class MatchingSampler {
 public:
  explicit MatchingSampler(const PlanarGraph& graph);

  MatchingSample draw(std::uint64_t seed);
  [[nodiscard]] double total() { return counter_.count(all_); }

 private:
  std::int64_t solve(const std::vector<int>& vertices, std::uint64_t key,
                     std::vector<GraphEdge>& out, RoundMeter& meter);
  const Separator& separator_for(const std::vector<int>& component);

  const PlanarGraph& graph_;
  MatchingCounter counter_;
  std::vector<int> all_;
  std::mutex mutex_;
  std::unordered_map<ElementSet, Separator, ElementSetHash> separators_;
};

MatchingSample sample_matching(const PlanarGraph& graph, std::uint64_t seed);

// Components of the subgraph induced by `vertices`, each sorted.
std::vector<std::vector<int>> induced_components(const PlanarGraph& graph,
                                                 const std::vector<int>& vertices);

// Exhaustive enumeration (test oracle); each matching sorted.
std::vector<std::vector<GraphEdge>> enumerate_perfect_matchings(const PlanarGraph& graph);

}  // namespace pardpp
