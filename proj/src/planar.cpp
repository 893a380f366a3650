#include "pardpp/planar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boyer_myrvold_planar_test.hpp>

#include "pardpp/errors.hpp"
#include "pardpp/rng.hpp"

namespace pardpp {
namespace {

std::uint64_t pair_key(int u, int v) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

std::vector<std::vector<int>> boost_rotation(int n, const std::vector<GraphEdge>& edges) {
  using BGraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS,
                                       boost::property<boost::vertex_index_t, int>,
                                       boost::property<boost::edge_index_t, int>>;
  using EdgeDesc = boost::graph_traits<BGraph>::edge_descriptor;
  BGraph g(n);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    boost::add_edge(edges[i].first, edges[i].second, static_cast<int>(i), g);
  }
  std::vector<std::vector<EdgeDesc>> embedding(n);
  const bool planar = boost::boyer_myrvold_planarity_test(
      boost::boyer_myrvold_params::graph = g,
      boost::boyer_myrvold_params::embedding = &embedding[0]);
  if (!planar) throw NotPlanar("graph is not planar");
  std::vector<std::vector<int>> rotation(n);
  for (int v = 0; v < n; ++v) {
    for (const EdgeDesc& e : embedding[v]) {
      const int a = static_cast<int>(boost::source(e, g));
      const int b = static_cast<int>(boost::target(e, g));
      rotation[v].push_back(a == v ? b : a);
    }
  }
  return rotation;
}

// Dart 2e runs first -> second of edge e, dart 2e+1 the other way.
struct DartIndex {
  std::unordered_map<std::uint64_t, int> position;  // (v, u) -> index of u in rotation[v]

  explicit DartIndex(const PlanarGraph& g) {
    for (int v = 0; v < g.size(); ++v) {
      const auto& rot = g.neighbors(v);
      for (std::size_t i = 0; i < rot.size(); ++i) position[pair_key(v, rot[i])] = static_cast<int>(i);
    }
  }
};

int dart_of(const PlanarGraph& g, int u, int v) {
  const int e = g.edge_index(u, v);
  return 2 * e + (g.edges()[e].first == u ? 0 : 1);
}

struct FaceData {
  std::vector<std::vector<int>> faces;  // dart ids
  std::vector<int> face_of_dart;
};

FaceData faces_of(const PlanarGraph& g) {
  const DartIndex index(g);
  const auto& edges = g.edges();
  FaceData data;
  data.face_of_dart.assign(2 * edges.size(), -1);
  for (int start = 0; start < static_cast<int>(data.face_of_dart.size()); ++start) {
    if (data.face_of_dart[start] >= 0) continue;
    const int face = static_cast<int>(data.faces.size());
    data.faces.emplace_back();
    int d = start;
    while (data.face_of_dart[d] < 0) {
      data.face_of_dart[d] = face;
      data.faces[face].push_back(d);
      const GraphEdge& e = edges[d / 2];
      const int u = d % 2 == 0 ? e.first : e.second;
      const int v = d % 2 == 0 ? e.second : e.first;
      const auto& rot = g.neighbors(v);
      const int i = index.position.at(pair_key(v, u));
      const int w = rot[(i + 1) % rot.size()];
      d = dart_of(g, v, w);
    }
  }
  return data;
}

std::vector<int> component_ids(const PlanarGraph& g, int* count) {
  std::vector<int> comp(g.size(), -1);
  int c = 0;
  for (int s = 0; s < g.size(); ++s) {
    if (comp[s] >= 0) continue;
    std::queue<int> q;
    q.push(s);
    comp[s] = c;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int u : g.neighbors(v)) {
        if (comp[u] < 0) {
          comp[u] = c;
          q.push(u);
        }
      }
    }
    ++c;
  }
  *count = c;
  return comp;
}

bool dart_along(const PlanarGraph& g, const std::vector<char>& forward, int dart) {
  (void)g;
  return (dart % 2 == 0) == static_cast<bool>(forward[dart / 2]);
}

void check_euler(const PlanarGraph& g) {
  int components = 0;
  const auto comp = component_ids(g, &components);
  std::vector<long> v(components, 0), e(components, 0), f(components, 0);
  for (int x = 0; x < g.size(); ++x) ++v[comp[x]];
  for (const auto& edge : g.edges()) ++e[comp[edge.first]];
  const FaceData data = faces_of(g);
  for (const auto& face : data.faces) ++f[comp[g.edges()[face.front() / 2].first]];
  for (int c = 0; c < components; ++c) {
    const long faces = e[c] == 0 ? 1 : f[c];
    if (v[c] - e[c] + faces != 2) {
      throw NotPlanar("rotation system violates Euler's formula (V - E + F = " +
                      std::to_string(v[c] - e[c] + faces) + ")");
    }
  }
}

}  // namespace

PlanarGraph::PlanarGraph(int n, std::vector<GraphEdge> edges) : n_(n), edges_(std::move(edges)) {
  index_edges();
  rotation_ = boost_rotation(n_, edges_);
}

PlanarGraph::PlanarGraph(int n, std::vector<GraphEdge> edges,
                         std::vector<std::vector<int>> rotation)
    : n_(n), edges_(std::move(edges)), rotation_(std::move(rotation)) {
  index_edges();
  if (static_cast<int>(rotation_.size()) != n_) {
    throw InvalidArgument("rotation system must list every vertex");
  }
  std::vector<std::vector<int>> expected(n_);
  for (const auto& [a, b] : edges_) {
    expected[a].push_back(b);
    expected[b].push_back(a);
  }
  for (int v = 0; v < n_; ++v) {
    auto have = rotation_[v];
    std::sort(have.begin(), have.end());
    std::sort(expected[v].begin(), expected[v].end());
    if (have != expected[v]) {
      throw InvalidArgument("rotation of vertex " + std::to_string(v) +
                            " is not a permutation of its neighbours");
    }
  }
  check_euler(*this);
}

void PlanarGraph::index_edges() {
  if (n_ < 0) throw InvalidArgument("vertex count must be nonnegative");
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    auto& [a, b] = edges_[i];
    if (a < 0 || b < 0 || a >= n_ || b >= n_) {
      throw InvalidArgument("edge endpoint out of range");
    }
    if (a == b) throw InvalidArgument("self-loop at vertex " + std::to_string(a));
    if (a > b) std::swap(a, b);
    if (!edge_lookup_.emplace(pair_key(a, b), static_cast<int>(i)).second) {
      throw InvalidArgument("duplicate edge " + std::to_string(a) + " " + std::to_string(b));
    }
  }
}

int PlanarGraph::edge_index(int u, int v) const {
  if (u > v) std::swap(u, v);
  const auto it = edge_lookup_.find(pair_key(u, v));
  return it == edge_lookup_.end() ? -1 : it->second;
}

PlanarGraph PlanarGraph::grid(int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw InvalidArgument("grid dimensions must be positive");
  std::vector<GraphEdge> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(v, v + 1);
      if (r + 1 < rows) edges.emplace_back(v, v + cols);
    }
  }
  return PlanarGraph(rows * cols, std::move(edges));
}

PlanarGraph PlanarGraph::path(int n) {
  std::vector<GraphEdge> edges;
  for (int v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
  return PlanarGraph(n, std::move(edges));
}

PlanarGraph PlanarGraph::cycle(int n) {
  if (n < 3) throw InvalidArgument("cycle needs at least 3 vertices");
  std::vector<GraphEdge> edges;
  for (int v = 0; v < n; ++v) edges.emplace_back(v, (v + 1) % n);
  return PlanarGraph(n, std::move(edges));
}

PlanarGraph parse_graph(std::istream& in) {
  std::string line;
  int n = -1;
  int m = -1;
  std::vector<GraphEdge> edges;
  std::vector<std::vector<int>> rotation;
  bool in_rotation = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      if (line.find("rotation") != std::string::npos) {
        if (n < 0 || static_cast<int>(edges.size()) != m) {
          throw ParseError("line " + std::to_string(line_no) + ": rotation before edge list");
        }
        in_rotation = true;
        rotation.assign(n, {});
      }
      continue;
    }
    std::replace(line.begin(), line.end(), ':', ' ');
    std::istringstream fields(line);
    if (n < 0) {
      if (!(fields >> n >> m) || n < 0 || m < 0) {
        throw ParseError("line " + std::to_string(line_no) + ": expected \"n m\"");
      }
      continue;
    }
    if (!in_rotation) {
      int u = 0;
      int v = 0;
      std::string extra;
      if (static_cast<int>(edges.size()) >= m || !(fields >> u >> v) || (fields >> extra)) {
        throw ParseError("line " + std::to_string(line_no) + ": expected edge \"u v\"");
      }
      edges.emplace_back(u, v);
      continue;
    }
    int v = 0;
    if (!(fields >> v) || v < 0 || v >= n) {
      throw ParseError("line " + std::to_string(line_no) + ": bad rotation vertex");
    }
    int w = 0;
    while (fields >> w) rotation[v].push_back(w);
    if (!fields.eof()) throw ParseError("line " + std::to_string(line_no) + ": bad rotation entry");
  }
  if (n < 0) throw ParseError("empty graph file");
  if (static_cast<int>(edges.size()) != m) {
    throw ParseError("expected " + std::to_string(m) + " edges, found " +
                     std::to_string(edges.size()));
  }
  try {
    if (in_rotation) return PlanarGraph(n, std::move(edges), std::move(rotation));
    return PlanarGraph(n, std::move(edges));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

PlanarGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file " + path);
  return parse_graph(in);
}

void write_graph(std::ostream& out, const PlanarGraph& graph, bool with_rotation) {
  out << graph.size() << ' ' << graph.edges().size() << '\n';
  for (const auto& [a, b] : graph.edges()) out << a << ' ' << b << '\n';
  if (!with_rotation) return;
  out << "# rotation\n";
  for (int v = 0; v < graph.size(); ++v) {
    out << v << ':';
    for (int u : graph.neighbors(v)) out << ' ' << u;
    out << '\n';
  }
}

std::vector<std::vector<GraphEdge>> trace_faces(const PlanarGraph& graph) {
  const FaceData data = faces_of(graph);
  std::vector<std::vector<GraphEdge>> faces;
  for (const auto& face : data.faces) {
    auto& walk = faces.emplace_back();
    for (int d : face) {
      const auto& e = graph.edges()[d / 2];
      walk.emplace_back(d % 2 == 0 ? e : GraphEdge{e.second, e.first});
    }
  }
  return faces;
}

Matrix KasteleynOrientation::signed_adjacency(const PlanarGraph& graph) const {
  Matrix a = Matrix::Zero(graph.size(), graph.size());
  for (std::size_t i = 0; i < graph.edges().size(); ++i) {
    const auto& [u, v] = graph.edges()[i];
    const double s = forward[i] ? 1.0 : -1.0;
    a(u, v) = s;
    a(v, u) = -s;
  }
  return a;
}

KasteleynOrientation kasteleyn_orientation(const PlanarGraph& graph) {
  const auto& edges = graph.edges();
  const std::size_t m = edges.size();
  KasteleynOrientation result;
  result.forward.assign(m, 1);
  std::vector<char> fixed(m, 0);

  // Spanning forest, oriented first -> second.
  std::vector<char> seen(graph.size(), 0);
  for (int s = 0; s < graph.size(); ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int u : graph.neighbors(v)) {
        if (seen[u]) continue;
        seen[u] = 1;
        fixed[graph.edge_index(u, v)] = 1;
        q.push(u);
      }
    }
  }

  const FaceData data = faces_of(graph);
  const int face_count = static_cast<int>(data.faces.size());
  std::vector<std::vector<int>> dual(face_count);  // non-tree edge ids
  for (std::size_t e = 0; e < m; ++e) {
    if (fixed[e]) continue;
    dual[data.face_of_dart[2 * e]].push_back(static_cast<int>(e));
    dual[data.face_of_dart[2 * e + 1]].push_back(static_cast<int>(e));
  }

  // One outer face per component: the longest boundary walk.
  int components = 0;
  const auto comp = component_ids(graph, &components);
  std::vector<int> outer(components, -1);
  for (int f = 0; f < face_count; ++f) {
    const int c = comp[edges[data.faces[f].front() / 2].first];
    if (outer[c] < 0 || data.faces[f].size() > data.faces[outer[c]].size()) outer[c] = f;
  }

  // Dual tree over non-tree edges; faces are fixed leaves first.
  std::vector<int> parent_edge(face_count, -1);
  std::vector<char> visited(face_count, 0);
  std::vector<int> order;
  for (int root : outer) {
    if (root < 0) continue;
    result.outer_faces.push_back(root);
    visited[root] = 1;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int f = q.front();
      q.pop();
      order.push_back(f);
      for (int e : dual[f]) {
        const int a = data.face_of_dart[2 * e];
        const int g = a == f ? data.face_of_dart[2 * e + 1] : a;
        if (visited[g]) continue;
        visited[g] = 1;
        parent_edge[g] = e;
        q.push(g);
      }
    }
  }
  if (static_cast<int>(order.size()) != face_count) {
    throw InvariantViolation("dual graph of the embedding is disconnected");
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int f = *it;
    const int pe = parent_edge[f];
    if (pe < 0) continue;
    int along = 0;
    int parent_dart = -1;
    for (int d : data.faces[f]) {
      if (d / 2 == pe) {
        parent_dart = d;
        continue;
      }
      if (!fixed[d / 2]) throw InvariantViolation("face fixed before its children");
      along += dart_along(graph, result.forward, d) ? 1 : 0;
    }
    // Make the parent edge run along the walk exactly when the rest is even.
    const bool want_along = along % 2 == 0;
    result.forward[pe] = ((parent_dart % 2 == 0) == want_along) ? 1 : 0;
    fixed[pe] = 1;
  }
  return result;
}

bool satisfies_face_parity(const PlanarGraph& graph, const KasteleynOrientation& orientation) {
  const FaceData data = faces_of(graph);
  for (int f = 0; f < static_cast<int>(data.faces.size()); ++f) {
    if (std::find(orientation.outer_faces.begin(), orientation.outer_faces.end(), f) !=
        orientation.outer_faces.end()) {
      continue;
    }
    int along = 0;
    for (int d : data.faces[f]) along += dart_along(graph, orientation.forward, d) ? 1 : 0;
    if (along % 2 == 0) return false;
  }
  return true;
}

MatchingCounter::MatchingCounter(const PlanarGraph& graph)
    : graph_(graph), signed_(kasteleyn_orientation(graph).signed_adjacency(graph)) {}

double MatchingCounter::count(const std::vector<int>& vertices) {
  if (vertices.empty()) return 1.0;
  if (vertices.size() % 2 == 1) return 0.0;
  {
    std::lock_guard lock(mutex_);
    const auto it = cache_.find(vertices);
    if (it != cache_.end()) return it->second;
  }
  const double value = std::sqrt(std::abs(det(principal_submatrix(signed_, vertices))));
  std::lock_guard lock(mutex_);
  cache_.emplace(vertices, value);
  return value;
}

double count_matchings(const PlanarGraph& graph) {
  if (graph.size() % 2 == 1) throw OddVertexCount("perfect matchings need an even vertex count");
  MatchingCounter counter(graph);
  std::vector<int> all(graph.size());
  for (int v = 0; v < graph.size(); ++v) all[v] = v;
  const double value = counter.count(all);
  const double rounded = std::round(value);
  if (std::abs(value - rounded) > 0.25) {
    throw InvariantViolation("matching count " + std::to_string(value) +
                             " is not close to an integer");
  }
  return rounded;
}

std::vector<std::pair<int, double>> edge_marginal(const PlanarGraph& graph, int v,
                                                  std::span<const GraphEdge> matched) {
  if (v < 0 || v >= graph.size()) throw InvalidArgument("vertex out of range");
  std::vector<char> removed(graph.size(), 0);
  for (const auto& [a, b] : matched) {
    if (graph.edge_index(a, b) < 0) throw InvalidArgument("conditioned pair is not an edge");
    if (removed[a] || removed[b]) throw InvalidArgument("conditioned edges are not a matching");
    removed[a] = removed[b] = 1;
  }
  if (removed[v]) throw InvalidArgument("vertex is already matched");
  std::vector<int> rest;
  for (int x = 0; x < graph.size(); ++x) {
    if (!removed[x]) rest.push_back(x);
  }
  MatchingCounter counter(graph);
  const double total = counter.count(rest);
  if (total < 0.5) throw NoPerfectMatching("no perfect matching extends the conditioning");
  std::vector<std::pair<int, double>> result;
  for (int u : graph.neighbors(v)) {
    if (removed[u]) {
      result.emplace_back(u, 0.0);
      continue;
    }
    std::vector<int> sub;
    for (int x : rest) {
      if (x != u && x != v) sub.push_back(x);
    }
    result.emplace_back(u, counter.count(sub) / total);
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<std::vector<int>> induced_components(const PlanarGraph& graph,
                                                 const std::vector<int>& vertices) {
  std::vector<char> in(graph.size(), 0);
  for (int v : vertices) in[v] = 1;
  std::vector<std::vector<int>> result;
  for (int s : vertices) {
    if (in[s] != 1) continue;
    auto& comp = result.emplace_back();
    std::queue<int> q;
    q.push(s);
    in[s] = 2;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      comp.push_back(v);
      for (int u : graph.neighbors(v)) {
        if (in[u] == 1) {
          in[u] = 2;
          q.push(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
  }
  return result;
}

namespace {

std::vector<int> without(const std::vector<int>& vertices, const std::vector<int>& removed_sorted) {
  std::vector<int> out;
  std::set_difference(vertices.begin(), vertices.end(), removed_sorted.begin(),
                      removed_sorted.end(), std::back_inserter(out));
  return out;
}

// Splits the rest of `vertices` around S; nullopt if unbalanced.
std::optional<Separator> try_separator(const PlanarGraph& graph, const std::vector<int>& vertices,
                                       std::vector<int> s) {
  std::sort(s.begin(), s.end());
  auto comps = induced_components(graph, without(vertices, s));
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  Separator sep;
  sep.separator = std::move(s);
  for (auto& c : comps) {
    auto& side = sep.side1.size() <= sep.side2.size() ? sep.side1 : sep.side2;
    side.insert(side.end(), c.begin(), c.end());
  }
  const std::size_t larger = std::max(sep.side1.size(), sep.side2.size());
  if (3 * larger > 2 * vertices.size()) return std::nullopt;
  std::sort(sep.side1.begin(), sep.side1.end());
  std::sort(sep.side2.begin(), sep.side2.end());
  return sep;
}

bool better(const Separator& a, const std::optional<Separator>& b) {
  if (!b) return true;
  if (a.separator.size() != b->separator.size()) return a.separator.size() < b->separator.size();
  return std::max(a.side1.size(), a.side2.size()) < std::max(b->side1.size(), b->side2.size());
}

// BFS distances and parents inside `mask`.
void bfs(const PlanarGraph& graph, const std::vector<char>& mask, int source,
         std::vector<int>& dist, std::vector<int>& parent) {
  dist.assign(graph.size(), -1);
  parent.assign(graph.size(), -1);
  std::queue<int> q;
  q.push(source);
  dist[source] = 0;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int u : graph.neighbors(v)) {
      if (mask[u] && dist[u] < 0) {
        dist[u] = dist[v] + 1;
        parent[u] = v;
        q.push(u);
      }
    }
  }
}

}  // namespace

Separator find_separator(const PlanarGraph& graph, const std::vector<int>& input) {
  std::vector<int> vertices = input;
  std::sort(vertices.begin(), vertices.end());
  for (int v : vertices) {
    if (v < 0 || v >= graph.size()) throw InvalidArgument("vertex out of range");
  }
  if (vertices.empty()) return {};
  std::optional<Separator> best = try_separator(graph, vertices, {});
  if (best) return *best;

  auto comps = induced_components(graph, vertices);
  const auto& largest = *std::max_element(
      comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  std::vector<char> mask(graph.size(), 0);
  for (int v : largest) mask[v] = 1;

  // Peripheral root by double BFS.
  std::vector<int> dist;
  std::vector<int> parent;
  bfs(graph, mask, largest.front(), dist, parent);
  int root = largest.front();
  for (int v : largest) {
    if (dist[v] > dist[root]) root = v;
  }
  bfs(graph, mask, root, dist, parent);
  int depth = 0;
  for (int v : largest) depth = std::max(depth, dist[v]);
  std::vector<std::vector<int>> levels(depth + 1);
  for (int v : largest) levels[dist[v]].push_back(v);
  for (const auto& level : levels) {
    if (auto sep = try_separator(graph, vertices, level); sep && better(*sep, best)) {
      best = std::move(sep);
    }
  }
  if (best) return *best;

  // Fundamental cycles of the BFS tree.
  for (int a : largest) {
    for (int b : graph.neighbors(a)) {
      if (!mask[b] || b < a || parent[a] == b || parent[b] == a) continue;
      std::vector<int> cycle;
      int x = a;
      int y = b;
      while (x != y) {
        if (dist[x] >= dist[y]) {
          cycle.push_back(x);
          x = parent[x];
        } else {
          cycle.push_back(y);
          y = parent[y];
        }
      }
      cycle.push_back(x);
      if (auto sep = try_separator(graph, vertices, cycle); sep && better(*sep, best)) {
        best = std::move(sep);
      }
    }
  }
  if (best) return *best;

  // Greedy: remove high-degree vertices of the largest remaining component.
  std::vector<int> s;
  while (true) {
    auto sep = try_separator(graph, vertices, s);
    if (sep) return *sep;
    auto rest = induced_components(graph, without(vertices, [&] {
                                     auto sorted = s;
                                     std::sort(sorted.begin(), sorted.end());
                                     return sorted;
                                   }()));
    const auto& big = *std::max_element(
        rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
    std::vector<char> in(graph.size(), 0);
    for (int v : big) in[v] = 1;
    int pick = big.front();
    int pick_degree = -1;
    for (int v : big) {
      int d = 0;
      for (int u : graph.neighbors(v)) d += in[u];
      if (d > pick_degree) {
        pick = v;
        pick_degree = d;
      }
    }
    s.push_back(pick);
  }
}

Separator find_separator(const PlanarGraph& graph) {
  std::vector<int> all(graph.size());
  for (int v = 0; v < graph.size(); ++v) all[v] = v;
  return find_separator(graph, all);
}

MatchingSampler::MatchingSampler(const PlanarGraph& graph) : graph_(graph), counter_(graph) {
  all_.resize(graph.size());
  for (int v = 0; v < graph.size(); ++v) all_[v] = v;
}

const Separator& MatchingSampler::separator_for(const std::vector<int>& component) {
  {
    std::lock_guard lock(mutex_);
    const auto it = separators_.find(component);
    if (it != separators_.end()) return it->second;
  }
  Separator sep = find_separator(graph_, component);
  std::lock_guard lock(mutex_);
  return separators_.emplace(component, std::move(sep)).first->second;
}

std::int64_t MatchingSampler::solve(const std::vector<int>& vertices, std::uint64_t key,
                                    std::vector<GraphEdge>& out, RoundMeter& meter) {
  if (vertices.empty()) return 0;
  const auto comps = induced_components(graph_, vertices);
  if (comps.size() > 1) {
    std::int64_t rounds = 0;
    for (const auto& comp : comps) {
      const std::uint64_t sub = derive_key(key, {ElementSetHash{}(comp)});
      rounds = std::max(rounds, solve(comp, sub, out, meter));
    }
    return rounds;
  }
  if (vertices.size() % 2 == 1) throw InvariantViolation("odd component reached in recursion");
  if (vertices.size() == 2) {
    if (graph_.edge_index(vertices[0], vertices[1]) < 0) {
      throw NoPerfectMatching("component without a perfect matching");
    }
    out.emplace_back(vertices[0], vertices[1]);
    meter.proposal_work += 1;
    meter.max_width = std::max<std::int64_t>(meter.max_width, 1);
    return 1;
  }

  const Separator& sep = separator_for(vertices);
  std::vector<int> remaining = vertices;
  CounterRng rng(derive_key(key, {0}));
  std::int64_t rounds = 0;
  for (int v : sep.separator) {
    if (!std::binary_search(remaining.begin(), remaining.end(), v)) continue;
    std::vector<int> candidates;
    std::vector<double> weights;
    for (int u : graph_.neighbors(v)) {
      if (!std::binary_search(remaining.begin(), remaining.end(), u)) continue;
      candidates.push_back(u);
      std::vector<int> pair = {std::min(u, v), std::max(u, v)};
      weights.push_back(counter_.count(without(remaining, pair)));
    }
    const auto width = static_cast<std::int64_t>(candidates.size());
    meter.proposal_work += width;
    meter.max_width = std::max(meter.max_width, width);
    ++rounds;
    const int pick = rng.draw(weights);
    if (pick < 0) throw NoPerfectMatching("separator vertex cannot be matched");
    const int u = candidates[pick];
    out.emplace_back(std::min(u, v), std::max(u, v));
    remaining = without(remaining, {std::min(u, v), std::max(u, v)});
  }
  return rounds + solve(remaining, derive_key(key, {1}), out, meter);
}

MatchingSample MatchingSampler::draw(std::uint64_t seed) {
  if (graph_.size() % 2 == 1) throw OddVertexCount("perfect matchings need an even vertex count");
  if (total() < 0.5) throw NoPerfectMatching("graph has no perfect matching");
  MatchingSample result;
  result.meter.adaptive_rounds = solve(all_, derive_key(seed, {}), result.edges, result.meter);
  std::sort(result.edges.begin(), result.edges.end());
  if (static_cast<int>(result.edges.size()) * 2 != graph_.size()) {
    throw InvariantViolation("sampled matching does not cover every vertex");
  }
  return result;
}

MatchingSample sample_matching(const PlanarGraph& graph, std::uint64_t seed) {
  MatchingSampler sampler(graph);
  return sampler.draw(seed);
}

std::vector<std::vector<GraphEdge>> enumerate_perfect_matchings(const PlanarGraph& graph) {
  std::vector<std::vector<GraphEdge>> result;
  std::vector<char> used(graph.size(), 0);
  std::vector<GraphEdge> current;
  auto recurse = [&](auto&& self, int from) -> void {
    while (from < graph.size() && used[from]) ++from;
    if (from == graph.size()) {
      auto m = current;
      std::sort(m.begin(), m.end());
      result.push_back(std::move(m));
      return;
    }
    used[from] = 1;
    for (int u : graph.neighbors(from)) {
      if (used[u]) continue;
      used[u] = 1;
      current.emplace_back(std::min(from, u), std::max(from, u));
      self(self, from + 1);
      current.pop_back();
      used[u] = 0;
    }
    used[from] = 0;
  };
  if (graph.size() % 2 == 0) recurse(recurse, 0);
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace pardpp
