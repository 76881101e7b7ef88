#include "shadowlab/space.hpp"

#include <algorithm>

namespace shadowlab {

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Interval: return "interval";
    case SpaceKind::Star: return "star-union";
    case SpaceKind::Bridge: return "bridge";
    case SpaceKind::CombProduct: return "comb-product";
    case SpaceKind::Torus: return "torus";
  }
  return "?";
}

TreeSpace::TreeSpace(SpaceKind kind,
                     std::shared_ptr<const TreeComplex> complex,
                     std::string name)
    : kind_(kind), complex_(std::move(complex)), name_(std::move(name)) {
  if (!complex_) throw std::domain_error("tree space: null complex");
}

double TreeSpace::diameter() const {
  if (diameter_cache_ >= 0.0) return diameter_cache_;
  double best = 0.0;
  const auto& tree = *complex_;
  for (VertexId u = 0; u < tree.vertex_count(); ++u)
    for (VertexId v = u + 1; v < tree.vertex_count(); ++v)
      best = std::max(best, tree.vertex_distance(u, v));
  diameter_cache_ = best;
  return best;
}

FinitePointSet<Location> TreeSpace::epsilon_net(double eps) const {
  if (!(eps > 0.0)) throw std::domain_error("epsilon_net: eps <= 0");
  FinitePointSet<Location> net;
  net.mesh = eps;
  const auto& tree = *complex_;
  std::vector<bool> vertex_done(tree.vertex_count(), false);
  for (EdgeId e = 0; e < tree.edge_count(); ++e) {
    const auto& ed = tree.edge(e);
    int steps = std::max(1, static_cast<int>(std::ceil(ed.length / eps)));
    for (int i = 0; i <= steps; ++i) {
      if (i == 0) {
        if (vertex_done[ed.a]) continue;
        vertex_done[ed.a] = true;
      }
      if (i == steps) {
        if (vertex_done[ed.b]) continue;
        vertex_done[ed.b] = true;
      }
      net.points.push_back(Location{e, static_cast<double>(i) / steps});
    }
  }
  return net;
}

Location sample_subtree(const TreeComplex& tree, const Subtree& s,
                        std::mt19937_64& rng) {
  if (s.empty()) throw std::domain_error("sample from empty subtree");
  double total = 0.0;
  for (const auto& iv : s.intervals())
    total += (iv.t1 - iv.t0) * tree.edge(iv.edge).length;
  if (total <= 0.0) {
    // Degenerate subtree: all intervals are points; pick the first.
    const auto& iv = s.intervals().front();
    return Location{iv.edge, iv.t0};
  }
  std::uniform_real_distribution<double> uni(0.0, total);
  double target = uni(rng);
  for (const auto& iv : s.intervals()) {
    double len = (iv.t1 - iv.t0) * tree.edge(iv.edge).length;
    if (target <= len || &iv == &s.intervals().back()) {
      double frac = len > 0.0 ? target / len : 0.0;
      return Location{iv.edge,
                      iv.t0 + (iv.t1 - iv.t0) * std::clamp(frac, 0.0, 1.0)};
    }
    target -= len;
  }
  throw std::logic_error("sample_subtree: walk failed");
}

Location TreeSpace::sample_ball(Location center, double r,
                                std::mt19937_64& rng) const {
  Subtree ball = path_ball(*complex_, center, r);
  return sample_subtree(*complex_, ball, rng);
}

Location TreeSpace::sample_uniform(std::mt19937_64& rng) const {
  return sample_subtree(*complex_, Subtree::whole(*complex_), rng);
}

TreeSpacePtr make_interval_space() {
  auto tree = std::make_shared<TreeComplex>(
      2, std::vector<TreeComplex::Edge>{{0, 1, 1.0}},
      std::vector<std::string>{"0", "1"});
  return std::make_shared<TreeSpace>(SpaceKind::Interval, tree, "interval");
}

TreeSpacePtr make_star_space(const std::vector<double>& arm_lengths) {
  if (arm_lengths.empty()) throw std::domain_error("star: no arms");
  std::vector<TreeComplex::Edge> edges;
  std::vector<std::string> labels{"center"};
  for (size_t i = 0; i < arm_lengths.size(); ++i) {
    edges.push_back({0, static_cast<VertexId>(i + 1), arm_lengths[i]});
    labels.push_back("tip" + std::to_string(i + 1));
  }
  auto tree = std::make_shared<TreeComplex>(
      static_cast<int>(arm_lengths.size()) + 1, std::move(edges),
      std::move(labels));
  return std::make_shared<TreeSpace>(
      SpaceKind::Star, tree,
      "st" + std::to_string(arm_lengths.size()));
}

TreeSpacePtr make_omega_star_space(int count) {
  if (count < 1) throw std::domain_error("omega star: count < 1");
  std::vector<double> arms;
  for (int n = 1; n <= count; ++n) arms.push_back(1.0 / n);
  auto space = make_star_space(arms);
  return std::make_shared<TreeSpace>(SpaceKind::Star, space->complex_ptr(),
                                     "st_omega[" + std::to_string(count) + "]");
}

}  // namespace shadowlab
