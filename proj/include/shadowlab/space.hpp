#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "shadowlab/tree.hpp"

namespace shadowlab {

/// Finite sample of a compact set; `mesh` is the density radius (every
/// point of the sampled set lies within mesh of some sample) when known.
template <typename P>
struct FinitePointSet {
  std::vector<P> points;
  double mesh = 0.0;
};

/// Max over pairs of distances. Within 2*mesh of the diameter of the
/// underlying compact set.
template <typename Dist, typename P>
double set_diameter(Dist&& dist, const std::vector<P>& pts) {
  if (pts.empty()) throw std::domain_error("diameter of empty set");
  double best = 0.0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, dist(pts[i], pts[j]));
  return best;
}

/// Hausdorff distance of finite samples: max of the two directed sup-min
/// scans. The inner loop stops early once a candidate cannot raise the sup.
template <typename Dist, typename P>
double hausdorff_distance(Dist&& dist, const std::vector<P>& a,
                          const std::vector<P>& b) {
  if (a.empty() || b.empty())
    throw std::domain_error("hausdorff: empty point set");
  double sup = 0.0;
  auto directed = [&](const std::vector<P>& from, const std::vector<P>& to) {
    for (const P& x : from) {
      double mind = std::numeric_limits<double>::infinity();
      for (const P& y : to) {
        double d = dist(x, y);
        if (d < mind) mind = d;
        if (mind <= sup) break;
      }
      if (mind > sup) sup = mind;
    }
  };
  directed(a, b);
  directed(b, a);
  return sup;
}

enum class SpaceKind { Interval, Star, Bridge, CombProduct, Torus };

std::string to_string(SpaceKind kind);

/// A metric tree with the path metric: the interval, star unions and bridge
/// spaces, whose case formulas the path metric reproduces exactly.
class TreeSpace {
 public:
  TreeSpace(SpaceKind kind, std::shared_ptr<const TreeComplex> complex,
            std::string name);

  SpaceKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const TreeComplex& complex() const { return *complex_; }
  std::shared_ptr<const TreeComplex> complex_ptr() const { return complex_; }

  double distance(Location a, Location b) const {
    return complex_->geodesic(a, b);
  }
  double diameter() const;

  /// Per-edge grid with spacing <= eps, vertices always included.
  FinitePointSet<Location> epsilon_net(double eps) const;

  /// Uniform sample (by arc length) from the radius-r path ball.
  Location sample_ball(Location center, double r, std::mt19937_64& rng) const;

  /// Uniform sample from the whole space.
  Location sample_uniform(std::mt19937_64& rng) const;

 private:
  SpaceKind kind_;
  std::shared_ptr<const TreeComplex> complex_;
  std::string name_;
  mutable double diameter_cache_ = -1.0;
};

using TreeSpacePtr = std::shared_ptr<const TreeSpace>;

/// Unit interval [0,1] as a single-edge complex.
TreeSpacePtr make_interval_space();

/// n-star with the given arm lengths (arm k = edge k, center = vertex 0).
TreeSpacePtr make_star_space(const std::vector<double>& arm_lengths);

/// Truncation of the omega-star: arms n = 1..count of length 1/n.
TreeSpacePtr make_omega_star_space(int count = 16);

/// Uniform sample from a subtree by arc length.
Location sample_subtree(const TreeComplex& tree, const Subtree& s,
                        std::mt19937_64& rng);

}  // namespace shadowlab
