#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "shadowlab/interval_map.hpp"
#include "shadowlab/space.hpp"
#include "shadowlab/tree.hpp"

namespace shadowlab {

/// Position on a tooth: the tooth is identified by the orbit of a seed
/// point of its level family ((seed, step) with tooth root = h^step(seed)),
/// the location on it by an arm of the attached star and a scaled radius.
struct ToothCoord {
  int seed = 0;
  long long step = 0;
  int arm = 0;
  double radius = 0.0;
};

/// A point of a comb stage: level-0 coordinate in [0,1] plus one tooth
/// coordinate per comb level below it. The metric is the iterated
/// max-product metric; coordinates at absent levels read as the star
/// origin. Points are exact and independent of the finite window complex.
struct StagePoint {
  double base = 0.0;
  std::vector<ToothCoord> chain;

  int level() const { return static_cast<int>(chain.size()); }
};

/// Shared construction tables of a tower of comb stages
/// X_0 = [0,1], X_{l+1} = comb over X_l with teeth attached along the
/// truncated orbit windows of the level's seed points. The self-maps and
/// bonding projections act coordinate-wise and are evaluated exactly on
/// ideal points; the finite complexes below only window the spaces.
class StageFamily {
 public:
  struct Level1Seed {
    double position = 0.5;
    long long back = 1;
    long long forward = 1;
  };
  struct Params {
    int order = 3;             // branch order n >= 3; teeth are st_{n-2}
    int stages = 1;            // number of comb levels K
    int density = 8;           // window points per stage (|D_k|)
    std::uint64_t seed = 0;    // jitter for seed placement
    double top_extent = 1.2;   // extent of the largest level-1 tooth
    double extent_ratio = 0.45;  // per-level extent damping
    double gamma = 1e-3;       // orbit-window truncation margin
    // Explicit level-1 seed orbits (empty = automatic placement).
    std::vector<Level1Seed> level1_seeds;
  };

  struct Window {
    long long lo = 0;
    long long hi = 0;
  };
  struct LevelFamily {
    std::vector<StagePoint> seeds;  // D_{l-1} seed points (chain length l-1)
    std::vector<Window> windows;    // orbit windows per seed
  };

  static std::shared_ptr<const StageFamily> build(const Params& params);

  const Params& params() const { return params_; }
  int arms() const { return params_.order - 2; }
  int stage_count() const { return params_.stages; }
  const LevelFamily& level(int l) const { return levels_.at(l - 1); }

  /// Extent (arm length) of tooth (level, seed, step); defined for every
  /// step, windowed or not.
  double extent(int level, int seed, long long step) const;
  bool in_window(int level, int seed, long long step) const;

  StagePoint apply(const StagePoint& p) const;
  StagePoint apply_inverse(const StagePoint& p) const;
  StagePoint iterate(const StagePoint& p, long long n) const;
  StagePoint project(const StagePoint& p, int level) const;
  static StagePoint canonical(StagePoint p);

  double distance(const StagePoint& a, const StagePoint& b) const;

  /// The D_{l-1} window points (roots of level-l window teeth).
  std::vector<StagePoint> window_points(int l) const;

 private:
  Params params_;
  IntervalMapPtr base_map_;
  std::vector<LevelFamily> levels_;

  friend class StageSpace;
};

using StageFamilyPtr = std::shared_ptr<const StageFamily>;

/// The stage-k space: max-product metric plus the finite window complex
/// (teeth over the window part of every level's D set).
class StageSpace {
 public:
  StageSpace(StageFamilyPtr family, int level);

  int level() const { return level_; }
  const StageFamily& family() const { return *family_; }
  const TreeComplex& complex() const { return *complex_; }

  double distance(const StagePoint& a, const StagePoint& b) const {
    return family_->distance(a, b);
  }
  double diameter() const;

  StagePoint location_point(Location loc) const;
  std::optional<Location> point_location(const StagePoint& p) const;
  double loc_distance(Location a, Location b) const {
    return family_->distance(location_point(a), location_point(b));
  }

  FinitePointSet<StagePoint> epsilon_net(double eps) const;

  /// Exact distance from a point to a window subtree in the stage metric.
  double point_to_subtree(const StagePoint& p, const Subtree& s) const;
  Location nearest_loc_in_subtree(const StagePoint& p, const Subtree& s) const;

  /// Preimage of a window subtree under the stage map: per-edge parameter
  /// scan using the exact coordinate maps (sound under-approximation at the
  /// window boundary, where teeth leave the finite complex).
  Subtree map_preimage(const Subtree& s) const;

  /// Image of a subtree whose intervals all lie on base edges (the base
  /// copy is invariant, so this is exact).
  Subtree base_subtree_image(const Subtree& s) const;

  /// Preimage of a subtree of the previous stage under the bonding
  /// projection: the cylinder over it, whole window teeth included.
  Subtree bonding_preimage(const StageSpace& coarser, const Subtree& s) const;

 private:
  StageFamilyPtr family_;
  int level_;
  std::shared_ptr<TreeComplex> complex_;

  struct EdgeGeom {
    int varying_level;  // 0 = base coordinate, l >= 1 = chain[l-1].radius
    StagePoint p0, p1;  // endpoints (orientation a -> b)
    double c0, c1;      // varying coordinate at the endpoints
  };
  std::vector<EdgeGeom> geom_;
  std::vector<double> base_values_;   // sorted base vertex coordinates
  std::vector<VertexId> base_vids_;   // vertex ids aligned with base_values_
  std::vector<EdgeId> base_edges_;    // base edge ids, aligned with segments
  struct ArmGeom {
    std::vector<double> radii;   // sorted vertex radii, radii[0] = 0
    std::vector<EdgeId> edges;   // edges between consecutive radii
  };
  std::map<std::tuple<int, int, long long, int>, ArmGeom> arm_geom_;

  void build_complex();
  // Value intervals of a subtree along the base line / a tooth arm.
  std::vector<std::pair<double, double>> base_value_intervals(
      const Subtree& s) const;
  std::vector<std::pair<double, double>> arm_value_intervals(
      const Subtree& s, int level, int seed, long long step, int arm) const;
  Subtree from_base_values(
      const std::vector<std::pair<double, double>>& vals) const;
};

using StageSpacePtr = std::shared_ptr<const StageSpace>;

/// Stage-k comb system: a simple homeomorphism with attractor (0, 0...) and
/// repeller (1, 0...). Exposes the same surface as TreeSystem so the
/// shadowing and hyperspace machinery applies unchanged.
struct StageSystem {
  using point_t = StagePoint;

  StageFamilyPtr family;
  StageSpacePtr space;
  std::vector<StagePoint> attractors;
  std::vector<StagePoint> repellers;
  std::string name;

  int level() const { return space->level(); }
  const TreeComplex& complex() const { return space->complex(); }
  bool invertible() const { return true; }
  bool strictly_simple() const { return true; }

  StagePoint apply(const StagePoint& x) const { return family->apply(x); }
  StagePoint apply_inverse(const StagePoint& x) const {
    return family->apply_inverse(x);
  }
  StagePoint iterate(const StagePoint& x, long long n) const {
    return family->iterate(x, n);
  }
  double distance(const StagePoint& a, const StagePoint& b) const {
    return family->distance(a, b);
  }
  double space_diameter() const { return space->diameter(); }
  FinitePointSet<StagePoint> net(double eps) const {
    return space->epsilon_net(eps);
  }
  StagePoint sample_uniform(std::mt19937_64& rng) const;
  /// Coordinate-box perturbation: moves the base coordinate or the top
  /// tooth radius by at most r, hence at most r in the stage metric.
  StagePoint sample_ball(const StagePoint& c, double r,
                         std::mt19937_64& rng) const;
  StagePoint drift(const StagePoint&, double) const {
    throw std::logic_error("stage system: drift perturbation not defined");
  }

  // Hyperspace hooks.
  StagePoint loc_to_point(Location loc) const {
    return space->location_point(loc);
  }
  std::optional<Location> point_to_loc(const StagePoint& p) const {
    return space->point_location(p);
  }
  double loc_distance(Location a, Location b) const {
    return space->loc_distance(a, b);
  }
  double point_to_subtree(const StagePoint& p, const Subtree& s) const {
    return space->point_to_subtree(p, s);
  }
  StagePoint nearest_in_subtree(const StagePoint& p, const Subtree& s) const {
    return space->location_point(space->nearest_loc_in_subtree(p, s));
  }
  Subtree subtree_image(const Subtree& a) const {
    return space->base_subtree_image(a);
  }
  Subtree subtree_preimage(const Subtree& a) const {
    return space->map_preimage(a);
  }
};

/// Seed specification for a generic comb: a base point together with an
/// orbit window; the teeth cover exactly the window orbit segments.
struct CombSeed {
  double position = 0.5;
  long long back = 1;
  long long forward = 1;
};

/// The comb over [0,1] with the square base map: teeth of order n attached
/// along the seeds' truncated orbits, scale 1/i in the zig-zag enumeration
/// of each seed family. Throws when a seed orbit window reaches the fixed
/// points (D must avoid p and q) or windows collide.
StageSystem make_comb_system(const std::vector<CombSeed>& seeds,
                             int tooth_order, double top_extent = 1.0);

/// The default stage-1 comb used by the experiments (two seeds, 8 teeth).
StageSystem make_stage1_comb();

/// The tower of universal-dendrite stage approximants for branch order n:
/// returns systems for stages 0..K (stage 0 is the bare interval).
std::vector<StageSystem> build_universal_stages(
    const StageFamily::Params& params);

/// Density radius of the branch-point set of a stage complex, measured on
/// a fine grid in the stage metric; +infinity when there are no branch
/// points (stage 0).
double branch_density_radius(const StageSystem& sys, double grid_mesh = 0.04);

}  // namespace shadowlab
