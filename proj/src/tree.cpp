#include "shadowlab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

namespace shadowlab {

TreeComplex::TreeComplex(int vertex_count, std::vector<Edge> edges,
                         std::vector<std::string> vertex_labels)
    : vertex_count_(vertex_count),
      edges_(std::move(edges)),
      labels_(std::move(vertex_labels)) {
  if (vertex_count_ <= 0) throw std::domain_error("tree: no vertices");
  if (static_cast<int>(edges_.size()) != vertex_count_ - 1)
    throw std::domain_error("tree: |E| != |V| - 1");
  labels_.resize(vertex_count_);
  incident_.assign(vertex_count_, {});
  for (EdgeId e = 0; e < edge_count(); ++e) {
    const Edge& ed = edges_[e];
    if (ed.a < 0 || ed.a >= vertex_count_ || ed.b < 0 || ed.b >= vertex_count_)
      throw std::domain_error("tree: edge endpoint out of range");
    if (ed.a == ed.b) throw std::domain_error("tree: self-loop");
    if (!(ed.length > 0.0)) throw std::domain_error("tree: edge length <= 0");
    incident_[ed.a].push_back(e);
    incident_[ed.b].push_back(e);
    total_length_ += ed.length;
  }
  parent_.assign(vertex_count_, -1);
  parent_edge_.assign(vertex_count_, -1);
  depth_.assign(vertex_count_, -1);
  root_dist_.assign(vertex_count_, 0.0);
  std::deque<VertexId> queue{0};
  depth_[0] = 0;
  int seen = 1;
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    for (EdgeId e : incident_[v]) {
      VertexId w = edges_[e].a == v ? edges_[e].b : edges_[e].a;
      if (depth_[w] >= 0) continue;
      depth_[w] = depth_[v] + 1;
      parent_[w] = v;
      parent_edge_[w] = e;
      root_dist_[w] = root_dist_[v] + edges_[e].length;
      queue.push_back(w);
      ++seen;
    }
  }
  if (seen != vertex_count_) throw std::domain_error("tree: not connected");
}

void TreeComplex::check_location(Location loc) const {
  if (loc.edge < 0 || loc.edge >= edge_count())
    throw std::domain_error("location: invalid edge id");
  if (!(loc.t >= -1e-12 && loc.t <= 1.0 + 1e-12))
    throw std::domain_error("location: t outside [0,1]");
}

Location TreeComplex::canonical(Location loc) const {
  check_location(loc);
  loc.t = std::clamp(loc.t, 0.0, 1.0);
  auto vertex = as_vertex(loc);
  if (!vertex) return loc;
  return vertex_location(*vertex);
}

Location TreeComplex::vertex_location(VertexId v) const {
  EdgeId e = incident_.at(v).front();
  for (EdgeId cand : incident_.at(v)) e = std::min(e, cand);
  return Location{e, edges_[e].a == v ? 0.0 : 1.0};
}

std::optional<VertexId> TreeComplex::as_vertex(Location loc) const {
  if (loc.t == 0.0) return edges_[loc.edge].a;
  if (loc.t == 1.0) return edges_[loc.edge].b;
  return std::nullopt;
}

bool TreeComplex::same_point(Location a, Location b, double tol) const {
  return geodesic(a, b) <= tol;
}

double TreeComplex::vertex_distance(VertexId u, VertexId v) const {
  if (u == v) return 0.0;
  VertexId x = u, y = v;
  double dx = 0.0, dy = 0.0;
  while (depth_[x] > depth_[y]) {
    dx += edges_[parent_edge_[x]].length;
    x = parent_[x];
  }
  while (depth_[y] > depth_[x]) {
    dy += edges_[parent_edge_[y]].length;
    y = parent_[y];
  }
  while (x != y) {
    dx += edges_[parent_edge_[x]].length;
    dy += edges_[parent_edge_[y]].length;
    x = parent_[x];
    y = parent_[y];
  }
  return dx + dy;
}

double TreeComplex::geodesic(Location a, Location b) const {
  check_location(a);
  check_location(b);
  if (a.edge == b.edge) return std::abs(a.t - b.t) * edges_[a.edge].length;
  const Edge& ea = edges_[a.edge];
  const Edge& eb = edges_[b.edge];
  const double a0 = a.t * ea.length, a1 = (1.0 - a.t) * ea.length;
  const double b0 = b.t * eb.length, b1 = (1.0 - b.t) * eb.length;
  double best = a0 + vertex_distance(ea.a, eb.a) + b0;
  best = std::min(best, a0 + vertex_distance(ea.a, eb.b) + b1);
  best = std::min(best, a1 + vertex_distance(ea.b, eb.a) + b0);
  best = std::min(best, a1 + vertex_distance(ea.b, eb.b) + b1);
  return best;
}

int TreeComplex::point_order(Location loc) const {
  check_location(loc);
  auto v = as_vertex(canonical(loc));
  if (v) return degree(*v);
  return 2;
}

std::vector<VertexId> TreeComplex::vertex_path(VertexId u, VertexId v) const {
  std::vector<VertexId> up, down;
  VertexId x = u, y = v;
  while (depth_[x] > depth_[y]) {
    up.push_back(x);
    x = parent_[x];
  }
  while (depth_[y] > depth_[x]) {
    down.push_back(y);
    y = parent_[y];
  }
  while (x != y) {
    up.push_back(x);
    down.push_back(y);
    x = parent_[x];
    y = parent_[y];
  }
  up.push_back(x);
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

// ---------------------------------------------------------------------------

Subtree::Subtree(std::vector<Interval> intervals)
    : intervals_(std::move(intervals)) {
  canonicalize();
}

void Subtree::canonicalize() {
  for (auto& iv : intervals_) {
    if (iv.t0 > iv.t1) std::swap(iv.t0, iv.t1);
    iv.t0 = std::clamp(iv.t0, 0.0, 1.0);
    iv.t1 = std::clamp(iv.t1, 0.0, 1.0);
  }
  std::sort(intervals_.begin(), intervals_.end(),
            [](const Interval& x, const Interval& y) {
              if (x.edge != y.edge) return x.edge < y.edge;
              if (x.t0 != y.t0) return x.t0 < y.t0;
              return x.t1 < y.t1;
            });
  std::vector<Interval> merged;
  for (const auto& iv : intervals_) {
    if (!merged.empty() && merged.back().edge == iv.edge &&
        iv.t0 <= merged.back().t1 + 1e-12) {
      merged.back().t1 = std::max(merged.back().t1, iv.t1);
    } else {
      merged.push_back(iv);
    }
  }
  intervals_ = std::move(merged);
}

Subtree Subtree::point(const TreeComplex& tree, Location loc) {
  loc = tree.canonical(loc);
  return Subtree({Interval{loc.edge, loc.t, loc.t}});
}

Subtree Subtree::whole(const TreeComplex& tree) {
  std::vector<Interval> all;
  all.reserve(tree.edge_count());
  for (EdgeId e = 0; e < tree.edge_count(); ++e)
    all.push_back(Interval{e, 0.0, 1.0});
  return Subtree(std::move(all));
}

Subtree Subtree::arc(const TreeComplex& tree, Location a, Location b) {
  a = tree.canonical(a);
  b = tree.canonical(b);
  if (a.edge == b.edge)
    return Subtree({Interval{a.edge, std::min(a.t, b.t), std::max(a.t, b.t)}});

  // Choose exit endpoints realizing the geodesic.
  const auto& ea = tree.edge(a.edge);
  const auto& eb = tree.edge(b.edge);
  const VertexId acands[2] = {ea.a, ea.b};
  const VertexId bcands[2] = {eb.a, eb.b};
  double best = -1.0;
  VertexId exa = ea.a, exb = eb.a;
  for (VertexId va : acands) {
    for (VertexId vb : bcands) {
      double offa = (va == ea.a ? a.t : 1.0 - a.t) * ea.length;
      double offb = (vb == eb.a ? b.t : 1.0 - b.t) * eb.length;
      double d = offa + tree.vertex_distance(va, vb) + offb;
      if (best < 0.0 || d < best - 1e-15) {
        best = d;
        exa = va;
        exb = vb;
      }
    }
  }
  std::vector<Interval> ivs;
  ivs.push_back(Interval{a.edge, std::min(a.t, exa == ea.a ? 0.0 : 1.0),
                         std::max(a.t, exa == ea.a ? 0.0 : 1.0)});
  ivs.push_back(Interval{b.edge, std::min(b.t, exb == eb.a ? 0.0 : 1.0),
                         std::max(b.t, exb == eb.a ? 0.0 : 1.0)});
  auto path = tree.vertex_path(exa, exb);
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    for (EdgeId e : tree.incident_edges(path[i])) {
      const auto& ed = tree.edge(e);
      VertexId other = ed.a == path[i] ? ed.b : ed.a;
      if (other == path[i + 1]) {
        ivs.push_back(Interval{e, 0.0, 1.0});
        break;
      }
    }
  }
  return Subtree(std::move(ivs));
}

Subtree Subtree::span(const TreeComplex& tree,
                      const std::vector<Location>& points) {
  if (points.empty()) throw std::domain_error("span: empty point set");
  Subtree out = Subtree::point(tree, points.front());
  for (size_t i = 1; i < points.size(); ++i)
    out = out.unite(Subtree::arc(tree, points.front(), points[i]));
  return out.normalized(tree);
}

double Subtree::length() const {
  double total = 0.0;
  for (const auto& iv : intervals_) total += iv.t1 - iv.t0;
  return total;  // caller scales by edge lengths where needed
}

bool Subtree::contains(const TreeComplex& tree, Location loc,
                       double tol) const {
  return path_distance_to(tree, loc) <= tol;
}

std::vector<Location> Subtree::corner_points(const TreeComplex& tree) const {
  std::vector<Location> pts;
  pts.reserve(intervals_.size() * 2);
  for (const auto& iv : intervals_) {
    pts.push_back(tree.canonical(Location{iv.edge, iv.t0}));
    pts.push_back(tree.canonical(Location{iv.edge, iv.t1}));
  }
  return pts;
}

std::vector<Location> Subtree::sample(const TreeComplex& tree,
                                      double mesh) const {
  if (!(mesh > 0.0)) throw std::domain_error("sample: mesh <= 0");
  std::vector<Location> pts;
  for (const auto& iv : intervals_) {
    double len = (iv.t1 - iv.t0) * tree.edge(iv.edge).length;
    int steps = std::max(1, static_cast<int>(std::ceil(len / mesh)));
    for (int i = 0; i <= steps; ++i) {
      double t = iv.t0 + (iv.t1 - iv.t0) * (static_cast<double>(i) / steps);
      pts.push_back(Location{iv.edge, t});
    }
  }
  return pts;
}

double Subtree::path_distance_to(const TreeComplex& tree, Location loc) const {
  if (intervals_.empty()) throw std::domain_error("distance to empty subtree");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& iv : intervals_) {
    const double elen = tree.edge(iv.edge).length;
    if (iv.edge == loc.edge) {
      double d;
      if (loc.t < iv.t0)
        d = (iv.t0 - loc.t) * elen;
      else if (loc.t > iv.t1)
        d = (loc.t - iv.t1) * elen;
      else
        d = 0.0;
      best = std::min(best, d);
      continue;
    }
    // Distance to a segment in a tree via endpoint distances:
    // d = max(0, (d0 + d1 - L) / 2).
    double d0 = tree.geodesic(loc, Location{iv.edge, iv.t0});
    double d1 = tree.geodesic(loc, Location{iv.edge, iv.t1});
    double L = (iv.t1 - iv.t0) * elen;
    best = std::min(best, std::max(0.0, 0.5 * (d0 + d1 - L)));
    if (best == 0.0) break;
  }
  return best;
}

bool Subtree::connected(const TreeComplex& tree) const {
  if (intervals_.size() <= 1) return true;
  const int n = static_cast<int>(intervals_.size());
  // Union intervals that touch: same edge (handled by canonical merge unless
  // separated) or meeting at a shared vertex.
  std::vector<int> comp(n);
  for (int i = 0; i < n; ++i) comp[i] = i;
  std::function<int(int)> find = [&](int x) {
    while (comp[x] != x) x = comp[x] = comp[comp[x]];
    return x;
  };
  auto touch_vertex = [&](const Interval& iv, VertexId v) {
    const auto& ed = tree.edge(iv.edge);
    if (ed.a == v && iv.t0 <= 1e-12) return true;
    if (ed.b == v && iv.t1 >= 1.0 - 1e-12) return true;
    return false;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto &x = intervals_[i], &y = intervals_[j];
      bool adj = false;
      if (x.edge == y.edge) {
        adj = y.t0 <= x.t1 + 1e-12 && x.t0 <= y.t1 + 1e-12;
      } else {
        for (VertexId v : {tree.edge(x.edge).a, tree.edge(x.edge).b}) {
          if (touch_vertex(x, v) && touch_vertex(y, v)) adj = true;
        }
      }
      if (adj) comp[find(i)] = find(j);
    }
  }
  int root = find(0);
  for (int i = 1; i < n; ++i)
    if (find(i) != root) return false;
  return true;
}

bool Subtree::touches_vertex(const TreeComplex& tree, VertexId v) const {
  for (const auto& iv : intervals_) {
    const auto& ed = tree.edge(iv.edge);
    if (ed.a == v && iv.t0 <= 1e-12) return true;
    if (ed.b == v && iv.t1 >= 1.0 - 1e-12) return true;
  }
  return false;
}

Subtree Subtree::normalized(const TreeComplex& tree) const {
  std::vector<Interval> keep;
  std::vector<VertexId> lone_vertices;
  for (const auto& iv : intervals_) {
    if (iv.t1 - iv.t0 > 0.0) {
      keep.push_back(iv);
      continue;
    }
    Location loc = tree.canonical(Location{iv.edge, iv.t0});
    auto v = tree.as_vertex(loc);
    if (!v) {
      keep.push_back(iv);
      continue;
    }
    lone_vertices.push_back(*v);
  }
  Subtree base(std::move(keep));
  std::vector<Interval> extra;
  for (VertexId v : lone_vertices) {
    if (!base.touches_vertex(tree, v)) {
      Location c = tree.vertex_location(v);
      extra.push_back(Interval{c.edge, c.t, c.t});
    }
  }
  if (extra.empty()) return base;
  auto all = base.intervals_;
  all.insert(all.end(), extra.begin(), extra.end());
  return Subtree(std::move(all));
}

Subtree Subtree::intersect(const TreeComplex& tree,
                           const Subtree& other) const {
  std::vector<Interval> out;
  size_t i = 0, j = 0;
  while (i < intervals_.size() && j < other.intervals_.size()) {
    const auto& x = intervals_[i];
    const auto& y = other.intervals_[j];
    if (x.edge < y.edge) {
      ++i;
      continue;
    }
    if (y.edge < x.edge) {
      ++j;
      continue;
    }
    double lo = std::max(x.t0, y.t0), hi = std::min(x.t1, y.t1);
    if (lo <= hi + 1e-12) out.push_back(Interval{x.edge, lo, std::max(lo, hi)});
    if (x.t1 < y.t1)
      ++i;
    else
      ++j;
  }
  // Shared vertices reached through different edges.
  for (VertexId v = 0; v < tree.vertex_count(); ++v) {
    if (touches_vertex(tree, v) && other.touches_vertex(tree, v)) {
      Location c = tree.vertex_location(v);
      out.push_back(Interval{c.edge, c.t, c.t});
    }
  }
  return Subtree(std::move(out)).normalized(tree);
}

Subtree Subtree::unite(const Subtree& other) const {
  std::vector<Interval> all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return Subtree(std::move(all));
}

Subtree Subtree::shrink_leaves(const TreeComplex& tree, double s) const {
  // A leaf end of the subtree is an interval endpoint whose point has no
  // other interval of the subtree touching it.
  std::vector<Interval> out = intervals_;
  auto touches = [&](Location p, size_t skip) {
    for (size_t k = 0; k < intervals_.size(); ++k) {
      if (k == skip) continue;
      if (intervals_[k].edge == p.edge) {
        if (p.t >= intervals_[k].t0 - 1e-12 && p.t <= intervals_[k].t1 + 1e-12)
          return true;
      } else if (Subtree({intervals_[k]}).contains(tree, p)) {
        return true;
      }
    }
    return false;
  };
  for (size_t k = 0; k < out.size(); ++k) {
    auto& iv = out[k];
    const double elen = tree.edge(iv.edge).length;
    double dt = s / elen;
    double mid = 0.5 * (iv.t0 + iv.t1);
    if (!touches(tree.canonical(Location{iv.edge, iv.t0}), k))
      iv.t0 = std::min(mid, iv.t0 + dt);
    if (!touches(tree.canonical(Location{iv.edge, iv.t1}), k))
      iv.t1 = std::max(mid, iv.t1 - dt);
  }
  return Subtree(std::move(out));
}

bool Subtree::operator==(const Subtree& other) const {
  return approx_equal(other, 0.0);
}

bool Subtree::approx_equal(const Subtree& other, double tol) const {
  if (intervals_.size() != other.intervals_.size()) return false;
  for (size_t i = 0; i < intervals_.size(); ++i) {
    if (intervals_[i].edge != other.intervals_[i].edge) return false;
    if (std::abs(intervals_[i].t0 - other.intervals_[i].t0) > tol) return false;
    if (std::abs(intervals_[i].t1 - other.intervals_[i].t1) > tol) return false;
  }
  return true;
}

Subtree path_ball(const TreeComplex& tree, Location center, double radius) {
  if (radius < 0.0) throw std::domain_error("path_ball: negative radius");
  std::vector<Subtree::Interval> out;
  // Expand along the center's edge, then flood over vertices with remaining
  // budget.
  center = tree.canonical(center);
  std::vector<double> budget(tree.vertex_count(), -1.0);
  const auto& ce = tree.edge(center.edge);
  double left = center.t * ce.length, right = (1.0 - center.t) * ce.length;
  out.push_back(Subtree::Interval{
      center.edge, center.t - std::min(radius, left) / ce.length,
      center.t + std::min(radius, right) / ce.length});
  std::deque<VertexId> queue;
  auto offer = [&](VertexId v, double b) {
    if (b < 0.0) return;
    if (budget[v] >= b) return;
    budget[v] = b;
    queue.push_back(v);
  };
  offer(ce.a, radius - left);
  offer(ce.b, radius - right);
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    double b = budget[v];
    for (EdgeId e : tree.incident_edges(v)) {
      const auto& ed = tree.edge(e);
      if (e == center.edge) continue;
      double reach = std::min(b, ed.length);
      if (ed.a == v) {
        out.push_back(Subtree::Interval{e, 0.0, reach / ed.length});
        offer(ed.b, b - ed.length);
      } else {
        out.push_back(Subtree::Interval{e, 1.0 - reach / ed.length, 1.0});
        offer(ed.a, b - ed.length);
      }
    }
  }
  return Subtree(std::move(out));
}

}  // namespace shadowlab
