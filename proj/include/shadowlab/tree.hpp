#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace shadowlab {

using VertexId = int;
using EdgeId = int;

/// A point of a metric tree, addressed by an edge and an arc-length
/// fraction t in [0,1] along it. t == 0 is edge endpoint a, t == 1 is
/// endpoint b; such locations denote the vertex itself.
struct Location {
  EdgeId edge = 0;
  double t = 0.0;
};

/// A finite metric tree: vertices 0..n-1, edges with positive lengths.
/// Construction validates tree-ness (connected, |E| = |V| - 1).
class TreeComplex {
 public:
  struct Edge {
    VertexId a;
    VertexId b;
    double length;
  };

  TreeComplex(int vertex_count, std::vector<Edge> edges,
              std::vector<std::string> vertex_labels = {});

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<EdgeId>& incident_edges(VertexId v) const {
    return incident_.at(v);
  }
  int degree(VertexId v) const {
    return static_cast<int>(incident_.at(v).size());
  }
  const std::string& vertex_label(VertexId v) const { return labels_.at(v); }

  double total_length() const { return total_length_; }

  /// Canonical form: t in {0,1} is rewritten to the lowest incident edge id
  /// of the corresponding vertex (ties by lower id, t chosen accordingly).
  Location canonical(Location loc) const;
  bool same_point(Location a, Location b, double tol = 1e-12) const;

  /// Vertex as a canonical location.
  Location vertex_location(VertexId v) const;
  /// If loc sits exactly on a vertex, return it.
  std::optional<VertexId> as_vertex(Location loc) const;

  /// Arc length of the unique path between two points.
  double geodesic(Location a, Location b) const;
  /// Distance between two vertices.
  double vertex_distance(VertexId u, VertexId v) const;

  /// Order of a point: vertex degree, or 2 for an edge-interior point.
  int point_order(Location loc) const;

  void check_location(Location loc) const;

  /// Vertices of the path from u to v, inclusive.
  std::vector<VertexId> vertex_path(VertexId u, VertexId v) const;

 private:
  int vertex_count_;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
  std::vector<std::vector<EdgeId>> incident_;
  // Rooted at vertex 0 for path queries.
  std::vector<VertexId> parent_;
  std::vector<EdgeId> parent_edge_;
  std::vector<int> depth_;
  std::vector<double> root_dist_;
  double total_length_ = 0.0;
};

/// A closed subtree (subcontinuum): a connected union of edge intervals,
/// kept in canonical form (sorted by edge id, intervals on one edge merged).
class Subtree {
 public:
  struct Interval {
    EdgeId edge;
    double t0;
    double t1;  // t0 <= t1
  };

  Subtree() = default;
  /// Canonicalizes (merges/sorts); does not check connectivity.
  explicit Subtree(std::vector<Interval> intervals);

  static Subtree point(const TreeComplex& tree, Location loc);
  static Subtree whole(const TreeComplex& tree);
  /// The unique arc between two points.
  static Subtree arc(const TreeComplex& tree, Location a, Location b);
  /// Smallest subtree containing all the given points.
  static Subtree span(const TreeComplex& tree,
                      const std::vector<Location>& points);

  bool empty() const { return intervals_.empty(); }
  const std::vector<Interval>& intervals() const { return intervals_; }
  double length() const;

  bool contains(const TreeComplex& tree, Location loc, double tol = 1e-12) const;
  bool connected(const TreeComplex& tree) const;

  /// Endpoints of every interval, canonicalized. Spans the subtree.
  std::vector<Location> corner_points(const TreeComplex& tree) const;

  /// Arc-length sampling with spacing <= mesh; includes interval ends.
  std::vector<Location> sample(const TreeComplex& tree, double mesh) const;

  /// Exact distance from a point to the subtree in the path metric.
  double path_distance_to(const TreeComplex& tree, Location loc) const;

  Subtree intersect(const TreeComplex& tree, const Subtree& other) const;
  Subtree unite(const Subtree& other) const;

  /// Canonical form relative to the tree: degenerate vertex intervals are
  /// rewritten to the canonical incident edge or dropped when another
  /// interval already touches that vertex.
  Subtree normalized(const TreeComplex& tree) const;
  bool touches_vertex(const TreeComplex& tree, VertexId v) const;

  /// Shrinks every leaf end of the subtree inward by s (used to realize
  /// open covers); degenerate intervals are kept as points.
  Subtree shrink_leaves(const TreeComplex& tree, double s) const;

  bool operator==(const Subtree& other) const;
  bool approx_equal(const Subtree& other, double tol) const;

 private:
  std::vector<Interval> intervals_;
  void canonicalize();
};

/// Ball of the path metric around a point: always a subtree.
Subtree path_ball(const TreeComplex& tree, Location center, double radius);

}  // namespace shadowlab
