#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "shadowlab/space.hpp"
#include "shadowlab/tree_map.hpp"

namespace shadowlab {

/// A homeomorphism (or continuous map) of a metric tree together with its
/// fixed-point skeleton: the attracting fixed set (forward limits) and the
/// repelling fixed set (backward limits). A system is simple in the strict
/// sense when both sets are singletons.
struct TreeSystem {
  using point_t = Location;

  TreeSpacePtr space;
  TreeMapPtr map;
  std::vector<Location> attractors;
  std::vector<Location> repellers;
  std::string name;

  const TreeComplex& complex() const { return space->complex(); }
  bool invertible() const { return map->is_homeomorphism(); }
  bool strictly_simple() const {
    return attractors.size() == 1 && repellers.size() == 1;
  }

  Location apply(Location x) const { return map->apply(complex(), x); }
  Location apply_inverse(Location x) const {
    return map->apply_inverse(complex(), x);
  }
  Location iterate(Location x, long long n) const;

  double distance(Location a, Location b) const {
    return space->distance(a, b);
  }
  double space_diameter() const { return space->diameter(); }
  FinitePointSet<Location> net(double eps) const {
    return space->epsilon_net(eps);
  }
  Location sample_uniform(std::mt19937_64& rng) const {
    return space->sample_uniform(rng);
  }
  Location sample_ball(Location c, double r, std::mt19937_64& rng) const {
    return space->sample_ball(c, r, rng);
  }
  /// Deterministic push by `step` toward t = 1 within the current edge
  /// (adversarial drift perturbation; saturates at the edge end).
  Location drift(Location x, double step) const {
    x = complex().canonical(x);
    double dt = step / complex().edge(x.edge).length;
    return Location{x.edge, std::min(1.0, x.t + dt)};
  }

  // Hyperspace hooks (Location doubles as the ideal point type).
  Location loc_to_point(Location loc) const { return complex().canonical(loc); }
  std::optional<Location> point_to_loc(Location p) const { return p; }
  double loc_distance(Location a, Location b) const { return distance(a, b); }
  double point_to_subtree(Location p, const Subtree& s) const {
    return s.path_distance_to(complex(), p);
  }
  Location nearest_in_subtree(Location p, const Subtree& s) const;
  Subtree subtree_image(const Subtree& a) const {
    return image_subtree(complex(), *map, a);
  }
  Subtree subtree_preimage(const Subtree& a) const {
    return preimage_subtree(complex(), *map, a);
  }
};

/// h(x) = x^2 on [0,1]; 0 quasi-attracting, 1 quasi-repelling. Simple.
TreeSystem make_square_system();

/// The three-fixed-point homeomorphism on [0,1] (fixed set {0,1/2,1});
/// {0,1} is a quasi-attractor set, 1/2 quasi-repels.
TreeSystem make_three_fixed_system();

/// Star of the given arm maps: arm k is invariant and carries arm_maps[k]
/// in the tip->center parametrization reversed (0 = center, which every arm
/// map must attract). Throws if an arm map does not attract the glue point.
TreeSystem make_star_system(const std::vector<IntervalMapPtr>& arm_maps,
                            const std::vector<double>& arm_lengths);

/// n-star with unit arms, each contracted toward the center by x -> x^2.
TreeSystem make_default_star_system(int arms);

/// Truncated omega-star (arm n of length 1/n) with square contractions.
TreeSystem make_omega_star_system(int arm_count = 16);

/// Bridge of two systems along a fresh unit edge between their attractor
/// glue vertices; the bridge edge carries `bridge_map` (which must fix both
/// endpoints and attract them). Glue points must be vertices.
TreeSystem make_bridge_system(const TreeSystem& a, Location glue_a,
                              const TreeSystem& b, Location glue_b,
                              IntervalMapPtr bridge_map);

/// Bridge of two default 3-stars at their centers via the three-fixed map.
TreeSystem make_default_bridge_system();

/// Interval system for an arbitrary continuous interval map (testing aid).
TreeSystem make_interval_system(IntervalMapPtr f, bool monotone, bool homeo,
                                std::vector<double> attractors,
                                std::vector<double> repellers);

// --- certificates -----------------------------------------------------------

struct ConvergenceReport {
  bool passed = true;
  int samples = 0;
  int forward_failures = 0;
  int backward_failures = 0;
  double worst_forward = 0.0;   // final distance to the attractor target
  double worst_backward = 0.0;  // final distance to the repeller target
  std::string first_failure;
};

/// Checks the simple-system property: sampled forward orbits converge to the
/// (single) attractor and backward orbits to the (single) repeller within
/// tol by n_max steps. Fails, with witnesses, on systems whose limit sets
/// are larger.
template <class Sys>
ConvergenceReport check_simple(const Sys& sys, int samples, int n_max,
                               double tol, std::uint64_t seed);

struct TrappingReport {
  bool found = false;
  double radius = 0.0;        // r with closure(f(B(p,r))) inside B(p,r)
  double image_radius = 0.0;  // measured max distance of the image
  double margin = 0.0;        // r - image_radius
};

/// Searches a radius schedule for a trapping ball around a declared fixed
/// point: max_{x in B(p,r)} d(f(x), p) < r with a grid-safety margin.
/// backward = true certifies quasi-repelling via the inverse map.
template <class Sys>
TrappingReport find_trapping_ball(const Sys& sys,
                                  const typename Sys::point_t& p,
                                  double max_radius, bool backward,
                                  double net_mesh);

struct MonotoneReport {
  bool passed = true;
  int samples = 0;
  int failures = 0;
  std::string first_failure;
};

/// Samples target points, gathers the fine-grid preimage set of each and
/// checks it is connected in the tree.
MonotoneReport verify_monotone(const TreeSystem& sys, int samples,
                               std::uint64_t seed, double net_mesh = 2e-3);

// --- template definitions ---------------------------------------------------

template <class Sys>
ConvergenceReport check_simple(const Sys& sys, int samples, int n_max,
                               double tol, std::uint64_t seed) {
  ConvergenceReport rep;
  rep.samples = samples;
  if (sys.attractors.size() != 1 || sys.repellers.size() != 1) {
    rep.passed = false;
    rep.first_failure = "system does not declare a single (p, q) pair";
  }
  const auto p = sys.attractors.front();
  const auto q = sys.repellers.front();
  std::mt19937_64 rng(seed);
  for (int i = 0; i < samples; ++i) {
    auto x = sys.sample_uniform(rng);
    if (sys.distance(x, p) < tol || sys.distance(x, q) < tol) continue;
    auto fwd = x;
    double dual = 0.0;
    bool ok_f = false;
    for (int n = 0; n < n_max; ++n) {
      fwd = sys.apply(fwd);
      dual = sys.distance(fwd, p);
      if (dual < tol) {
        ok_f = true;
        break;
      }
    }
    if (!ok_f) {
      rep.passed = false;
      ++rep.forward_failures;
      rep.worst_forward = std::max(rep.worst_forward, dual);
      if (rep.first_failure.empty())
        rep.first_failure = "forward orbit stalled at distance " +
                            std::to_string(dual) + " from the attractor";
    }
    auto bwd = x;
    bool ok_b = false;
    for (int n = 0; n < n_max; ++n) {
      bwd = sys.apply_inverse(bwd);
      dual = sys.distance(bwd, q);
      if (dual < tol) {
        ok_b = true;
        break;
      }
    }
    if (!ok_b) {
      rep.passed = false;
      ++rep.backward_failures;
      rep.worst_backward = std::max(rep.worst_backward, dual);
      if (rep.first_failure.empty())
        rep.first_failure = "backward orbit stalled at distance " +
                            std::to_string(dual) + " from the repeller";
    }
  }
  return rep;
}

template <class Sys>
TrappingReport find_trapping_ball(const Sys& sys,
                                  const typename Sys::point_t& p,
                                  double max_radius, bool backward,
                                  double net_mesh) {
  TrappingReport rep;
  auto net = sys.net(net_mesh);
  double r = max_radius;
  for (int step = 0; step < 24; ++step, r *= 0.7) {
    double image_radius = 0.0;
    for (const auto& x : net.points) {
      if (sys.distance(x, p) > r) continue;
      auto y = backward ? sys.apply_inverse(x) : sys.apply(x);
      image_radius = std::max(image_radius, sys.distance(y, p));
    }
    // Off-grid slack: a point within mesh of the ball boundary may map up to
    // one local oscillation further out; require a 3*mesh margin.
    if (image_radius < r - 3.0 * net_mesh) {
      rep.found = true;
      rep.radius = r;
      rep.image_radius = image_radius;
      rep.margin = r - image_radius;
      return rep;
    }
  }
  return rep;
}

}  // namespace shadowlab
