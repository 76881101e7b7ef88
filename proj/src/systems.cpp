#include "shadowlab/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace shadowlab {

Location TreeSystem::iterate(Location x, long long n) const {
  if (n >= 0) {
    for (long long i = 0; i < n; ++i) x = apply(x);
  } else {
    for (long long i = 0; i < -n; ++i) x = apply_inverse(x);
  }
  return x;
}

Location TreeSystem::nearest_in_subtree(Location p, const Subtree& s) const {
  if (s.empty()) throw std::domain_error("nearest point of empty subtree");
  const auto& tree = complex();
  double best = std::numeric_limits<double>::infinity();
  Location best_loc = p;
  for (const auto& iv : s.intervals()) {
    const double elen = tree.edge(iv.edge).length;
    Location cand;
    double d;
    if (iv.edge == p.edge) {
      double t = std::clamp(p.t, iv.t0, iv.t1);
      cand = Location{iv.edge, t};
      d = std::abs(p.t - t) * elen;
    } else {
      double d0 = tree.geodesic(p, Location{iv.edge, iv.t0});
      double d1 = tree.geodesic(p, Location{iv.edge, iv.t1});
      double L = (iv.t1 - iv.t0) * elen;
      double gap = std::max(0.0, 0.5 * (d0 + d1 - L));
      // Nearest point sits at arc-offset d0 - gap from the t0 end.
      double off = std::clamp(d0 - gap, 0.0, L);
      double t = iv.t0 + (L > 0.0 ? (iv.t1 - iv.t0) * off / L : 0.0);
      cand = Location{iv.edge, t};
      d = gap;
    }
    if (d < best) {
      best = d;
      best_loc = cand;
    }
  }
  return complex().canonical(best_loc);
}

namespace {

// Checks that an increasing interval self-map attracts 0 (h(x) < x near 0).
bool attracts_origin(const IntervalMap& h) {
  for (double x : {1e-3, 1e-2, 0.1}) {
    if (!(h.apply(x) < x)) return false;
  }
  return h.apply(0.0) == 0.0;
}

bool attracts_one(const IntervalMap& h) {
  for (double x : {1.0 - 1e-3, 1.0 - 1e-2, 0.9}) {
    if (!(h.apply(x) > x)) return false;
  }
  return h.apply(1.0) == 1.0;
}

}  // namespace

TreeSystem make_interval_system(IntervalMapPtr f, bool monotone, bool homeo,
                                std::vector<double> attractors,
                                std::vector<double> repellers) {
  TreeSystem sys;
  sys.space = make_interval_space();
  sys.map = std::make_shared<IntervalTreeMap>(f, monotone, homeo);
  for (double a : attractors) sys.attractors.push_back(Location{0, a});
  for (double r : repellers) sys.repellers.push_back(Location{0, r});
  sys.name = f->describe() + "-interval";
  return sys;
}

TreeSystem make_square_system() {
  auto sys = make_interval_system(square_map(), true, true, {0.0}, {1.0});
  sys.name = "square";
  return sys;
}

TreeSystem make_three_fixed_system() {
  auto sys =
      make_interval_system(three_fixed_map(), true, true, {0.0, 1.0}, {0.5});
  sys.name = "three-fixed";
  return sys;
}

TreeSystem make_star_system(const std::vector<IntervalMapPtr>& arm_maps,
                            const std::vector<double>& arm_lengths) {
  if (arm_maps.size() != arm_lengths.size() || arm_maps.empty())
    throw std::domain_error("star system: arm count mismatch");
  for (const auto& h : arm_maps)
    if (!h->invertible() || !attracts_origin(*h))
      throw std::invalid_argument(
          "star system: arm map must attract the glue point");
  auto space = make_star_space(arm_lengths);
  std::vector<ArcPieceMap::Piece> pieces;
  for (size_t k = 0; k < arm_maps.size(); ++k) {
    // Arm edge k runs center (vertex 0) -> tip; anchor at the center.
    pieces.push_back(ArcPieceMap::Piece{{static_cast<EdgeId>(k)},
                                        {true},
                                        arm_maps[k]});
  }
  TreeSystem sys;
  sys.space = space;
  sys.map = std::make_shared<ArcPieceMap>(space->complex(), std::move(pieces));
  sys.attractors = {space->complex().vertex_location(0)};
  for (size_t k = 0; k < arm_maps.size(); ++k)
    sys.repellers.push_back(
        space->complex().vertex_location(static_cast<VertexId>(k + 1)));
  sys.name = "st" + std::to_string(arm_maps.size());
  return sys;
}

TreeSystem make_default_star_system(int arms) {
  if (arms < 1) throw std::domain_error("star system: arms < 1");
  std::vector<IntervalMapPtr> maps(arms, square_map());
  std::vector<double> lengths(arms, 1.0);
  return make_star_system(maps, lengths);
}

TreeSystem make_omega_star_system(int arm_count) {
  std::vector<IntervalMapPtr> maps(arm_count, square_map());
  std::vector<double> lengths;
  for (int n = 1; n <= arm_count; ++n) lengths.push_back(1.0 / n);
  auto sys = make_star_system(maps, lengths);
  sys.name = "st_omega[" + std::to_string(arm_count) + "]";
  return sys;
}

TreeSystem make_bridge_system(const TreeSystem& a, Location glue_a,
                              const TreeSystem& b, Location glue_b,
                              IntervalMapPtr bridge_map) {
  if (!bridge_map->invertible() || bridge_map->apply(0.0) != 0.0 ||
      bridge_map->apply(1.0) != 1.0)
    throw std::invalid_argument("bridge: map must fix both endpoints");
  if (!attracts_origin(*bridge_map) || !attracts_one(*bridge_map))
    throw std::invalid_argument(
        "bridge: endpoints must be a quasi-attractor set of the bridge map");
  auto va = a.complex().as_vertex(a.complex().canonical(glue_a));
  auto vb = b.complex().as_vertex(b.complex().canonical(glue_b));
  if (!va || !vb)
    throw std::invalid_argument("bridge: glue points must be vertices");
  const auto* ma = dynamic_cast<const ArcPieceMap*>(a.map.get());
  const auto* mb = dynamic_cast<const ArcPieceMap*>(b.map.get());
  if (!ma || !mb)
    throw std::invalid_argument("bridge: component maps must be arc-piece maps");

  const int nva = a.complex().vertex_count();
  const int ea = a.complex().edge_count();
  std::vector<TreeComplex::Edge> edges;
  std::vector<std::string> labels;
  for (VertexId v = 0; v < nva; ++v) labels.push_back(a.complex().vertex_label(v));
  for (EdgeId e = 0; e < ea; ++e) edges.push_back(a.complex().edge(e));
  for (VertexId v = 0; v < b.complex().vertex_count(); ++v)
    labels.push_back(b.complex().vertex_label(v));
  for (EdgeId e = 0; e < b.complex().edge_count(); ++e) {
    auto ed = b.complex().edge(e);
    ed.a += nva;
    ed.b += nva;
    edges.push_back(ed);
  }
  // Bridge edge, unit length, glue_a -> glue_b.
  edges.push_back(TreeComplex::Edge{*va, *vb + nva, 1.0});
  auto tree = std::make_shared<TreeComplex>(
      nva + b.complex().vertex_count(), std::move(edges), std::move(labels));
  auto space = std::make_shared<TreeSpace>(SpaceKind::Bridge, tree,
                                           a.name + "<->" + b.name);

  std::vector<ArcPieceMap::Piece> pieces = ma->pieces();
  for (auto piece : mb->pieces()) {
    for (auto& e : piece.edges) e += ea;
    pieces.push_back(std::move(piece));
  }
  pieces.push_back(ArcPieceMap::Piece{
      {static_cast<EdgeId>(tree->edge_count() - 1)}, {true}, bridge_map});

  auto relocate_a = [&](Location loc) { return tree->canonical(loc); };
  auto relocate_b = [&](Location loc) {
    return tree->canonical(Location{loc.edge + ea, loc.t});
  };

  TreeSystem sys;
  sys.space = space;
  sys.map = std::make_shared<ArcPieceMap>(*tree, std::move(pieces));
  for (auto loc : a.attractors) sys.attractors.push_back(relocate_a(loc));
  for (auto loc : b.attractors) sys.attractors.push_back(relocate_b(loc));
  for (auto loc : a.repellers) sys.repellers.push_back(relocate_a(loc));
  for (auto loc : b.repellers) sys.repellers.push_back(relocate_b(loc));
  // Repelling fixed points of the bridge map become repellers of the glue.
  for (double f : bridge_map->fixed_points()) {
    if (f > 0.0 && f < 1.0)
      sys.repellers.push_back(
          tree->canonical(Location{tree->edge_count() - 1, f}));
  }
  sys.name = space->name();
  return sys;
}

TreeSystem make_default_bridge_system() {
  auto s1 = make_default_star_system(3);
  auto s2 = make_default_star_system(3);
  auto center1 = s1.complex().vertex_location(0);
  auto center2 = s2.complex().vertex_location(0);
  return make_bridge_system(s1, center1, s2, center2, three_fixed_map());
}

MonotoneReport verify_monotone(const TreeSystem& sys, int samples,
                               std::uint64_t seed, double net_mesh) {
  MonotoneReport rep;
  rep.samples = samples;
  auto net = sys.net(net_mesh);
  const auto& tree = sys.complex();
  std::vector<Location> images;
  images.reserve(net.points.size());
  for (const auto& x : net.points) images.push_back(sys.apply(x));
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    Location target = sys.sample_uniform(rng);
    // Fine-grid preimage set: points whose image lands near the target.
    const double sel = 3.0 * net_mesh;
    std::vector<Location> pre;
    for (size_t i = 0; i < net.points.size(); ++i)
      if (tree.geodesic(images[i], target) <= sel) pre.push_back(net.points[i]);
    if (pre.empty()) continue;
    // Connectivity on the grid: points adjacent when within two grid steps.
    const double adj = 2.5 * net_mesh;
    std::vector<int> comp(pre.size());
    for (size_t i = 0; i < pre.size(); ++i) comp[i] = static_cast<int>(i);
    auto find = [&](int x) {
      while (comp[x] != x) x = comp[x] = comp[comp[x]];
      return x;
    };
    for (size_t i = 0; i < pre.size(); ++i)
      for (size_t j = i + 1; j < pre.size(); ++j)
        if (tree.geodesic(pre[i], pre[j]) <= adj) comp[find(i)] = find(j);
    int root = find(0);
    bool connected = true;
    for (size_t i = 1; i < pre.size(); ++i)
      if (find(static_cast<int>(i)) != root) connected = false;
    if (!connected) {
      rep.passed = false;
      ++rep.failures;
      if (rep.first_failure.empty())
        rep.first_failure =
            "preimage of a sampled point splits into several grid components";
    }
  }
  return rep;
}

}  // namespace shadowlab
