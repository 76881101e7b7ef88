#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "shadowlab/space.hpp"
#include "shadowlab/systems.hpp"

namespace shadowlab {

/// A finite delta-pseudo-orbit. Entries run over times -back .. (size-1-back);
/// two-sided windows are used for homeomorphisms, one-sided runs have
/// back == 0.
template <typename P>
struct PseudoOrbit {
  std::vector<P> points;
  int back = 0;
  double delta = 0.0;     // declared jump bound
  double max_jump = 0.0;  // measured max of d(f(x_k), x_{k+1})

  int size() const { return static_cast<int>(points.size()); }
  const P& at_time(int k) const { return points.at(k + back); }
  int first_time() const { return -back; }
  int last_time() const { return size() - 1 - back; }
};

enum class ShadowVerdict { Shadowed, NotShadowedInFamily, Refuted };

std::string to_string(ShadowVerdict v);

struct ShadowReport {
  ShadowVerdict verdict = ShadowVerdict::NotShadowedInFamily;
  bool shadowed = false;
  double eps = 0.0;
  double delta = 0.0;
  int steps = 0;
  double max_step_distance = 0.0;
  std::vector<double> step_distances;
  std::string method;
  std::optional<int> witness_index;   // index into the searched family
  double lipschitz_budget = 0.0;      // recorded certificate budget
  double mesh = 0.0;
};

enum class PerturbationMode { Ball, Drift };

/// x_{k+1} sampled from the delta/2-ball around f(x_k) (Ball mode), or pushed
/// deterministically delta/2 forward along the space (Drift mode, the
/// adversarial generator for maps with no expansivity to absorb it).
template <class Sys>
PseudoOrbit<typename Sys::point_t> generate_pseudo_orbit(
    const Sys& sys, const typename Sys::point_t& x0, double delta, int steps,
    std::mt19937_64& rng, PerturbationMode mode = PerturbationMode::Ball,
    int back_steps = 0);

/// Iterates y exactly (backward over the negative window for invertible
/// maps) and compares step-wise against the pseudo-orbit.
template <class Sys>
ShadowReport verify_shadow(const Sys& sys, const typename Sys::point_t& y,
                           const PseudoOrbit<typename Sys::point_t>& po,
                           double eps);

/// Early-exit check used inside searches.
template <class Sys>
bool shadows(const Sys& sys, const typename Sys::point_t& y,
             const PseudoOrbit<typename Sys::point_t>& po, double eps);

/// Brute-force oracle: scans the net (plus optional extra candidates, after
/// the net) in index order and returns the first verified witness.
/// Requires net.mesh <= eps/2.
template <class Sys>
std::pair<std::optional<typename Sys::point_t>, ShadowReport>
search_shadow_point(const Sys& sys,
                    const PseudoOrbit<typename Sys::point_t>& po, double eps,
                    const FinitePointSet<typename Sys::point_t>& net,
                    const std::vector<typename Sys::point_t>& extra = {});

/// Constants of the constructive shadower for a system with attracting and
/// repelling fixed sets: per-component trapping balls, the uniform escape
/// time, the eta separation margin and the resulting delta threshold.
struct ShadowerParams {
  double eps = 0.0;
  double eta = 0.0;
  double delta = 0.0;     // the certified threshold
  int escape_time = 0;    // N
  double lipschitz = 1.0; // grid estimate for one step, padded
  double net_mesh = 0.0;
  std::vector<double> attractor_radii;
  std::vector<double> repeller_radii;
};

/// The constructive shadower extracted from the trapping-neighborhood proof:
/// pseudo-orbits trapped near the attracting (repelling) set are shadowed by
/// its fixed points; otherwise f^{-n}(x_n) for the first escape index n
/// shadows. Valid for pseudo-orbits with jumps below delta_threshold().
template <class Sys>
class SimpleShadower {
 public:
  using point_t = typename Sys::point_t;

  SimpleShadower(const Sys& sys, double eps, double net_mesh = 2e-3);

  double delta_threshold() const { return params_.delta; }
  const ShadowerParams& params() const { return params_; }

  point_t shadow_point(const PseudoOrbit<point_t>& po) const;

 private:
  const Sys& sys_;
  ShadowerParams params_;
  std::vector<point_t> attractors_, repellers_;
  std::vector<double> a_radius_, a_image_radius_;
  std::vector<double> r_radius_, r_image_radius_;

  int in_attractor_ball(const point_t& x) const;
  int in_repeller_ball(const point_t& x) const;
  bool in_inverse_repeller_region(const point_t& x) const;
};

struct ModulusRow {
  double delta;
  int trials = 0;
  int shadowed = 0;
};

struct ModulusReport {
  std::optional<double> best_delta;  // largest all-pass delta in the grid
  std::vector<ModulusRow> table;
  double eps = 0.0;
  int steps = 0;
};

/// Empirical delta(eps) estimate: for each delta in the ascending grid runs
/// `trials` random pseudo-orbits against the brute-force oracle over an
/// eps/2 net augmented with the constructive candidates f^{-n}(x_n).
template <class Sys>
ModulusReport estimate_modulus(const Sys& sys, double eps, int trials,
                               const std::vector<double>& delta_grid,
                               int steps, std::uint64_t seed,
                               PerturbationMode mode = PerturbationMode::Ball);

// --- template definitions ---------------------------------------------------

template <class Sys>
PseudoOrbit<typename Sys::point_t> generate_pseudo_orbit(
    const Sys& sys, const typename Sys::point_t& x0, double delta, int steps,
    std::mt19937_64& rng, PerturbationMode mode, int back_steps) {
  if (!(delta >= 0.0)) throw std::domain_error("pseudo orbit: delta < 0");
  if (steps < 1) throw std::domain_error("pseudo orbit: steps < 1");
  PseudoOrbit<typename Sys::point_t> po;
  po.delta = delta;
  po.back = back_steps;
  std::vector<typename Sys::point_t> forward{x0};
  auto perturb_forward = [&](const typename Sys::point_t& prev) {
    auto fx = sys.apply(prev);
    if (delta == 0.0) return fx;
    if (mode == PerturbationMode::Drift) return sys.drift(fx, delta / 2.0);
    for (int tries = 0; tries < 32; ++tries) {
      auto cand = sys.sample_ball(fx, delta / 2.0, rng);
      if (sys.distance(fx, cand) < delta) return cand;
    }
    return fx;
  };
  for (int k = 0; k < steps; ++k) forward.push_back(perturb_forward(forward.back()));
  std::vector<typename Sys::point_t> backward;  // x_{-1}, x_{-2}, ...
  if (back_steps > 0) {
    auto prev = x0;  // choose x_{-(k+1)} near f^{-1}(x_{-k})
    for (int k = 0; k < back_steps; ++k) {
      auto base = sys.apply_inverse(prev);
      auto chosen = base;
      if (delta > 0.0 && mode == PerturbationMode::Ball) {
        for (int tries = 0; tries < 32; ++tries) {
          auto cand = sys.sample_ball(base, delta / 4.0, rng);
          if (sys.distance(sys.apply(cand), prev) < delta) {
            chosen = cand;
            break;
          }
        }
      }
      backward.push_back(chosen);
      prev = chosen;
    }
  }
  po.points.assign(backward.rbegin(), backward.rend());
  po.points.insert(po.points.end(), forward.begin(), forward.end());
  for (size_t i = 0; i + 1 < po.points.size(); ++i) {
    po.max_jump = std::max(
        po.max_jump, sys.distance(sys.apply(po.points[i]), po.points[i + 1]));
  }
  if (delta > 0.0 && po.max_jump >= delta)
    throw std::logic_error("pseudo orbit: jump bound violated");
  return po;
}

template <class Sys>
ShadowReport verify_shadow(const Sys& sys, const typename Sys::point_t& y,
                           const PseudoOrbit<typename Sys::point_t>& po,
                           double eps) {
  ShadowReport rep;
  rep.eps = eps;
  rep.delta = po.delta;
  rep.steps = po.size() - 1;
  rep.method = "verify";
  rep.step_distances.resize(po.size());
  auto fwd = y;
  for (int k = 0; k <= po.last_time(); ++k) {
    if (k > 0) fwd = sys.apply(fwd);
    rep.step_distances[k + po.back] = sys.distance(fwd, po.at_time(k));
  }
  auto bwd = y;
  for (int k = -1; k >= po.first_time(); --k) {
    bwd = sys.apply_inverse(bwd);
    rep.step_distances[k + po.back] = sys.distance(bwd, po.at_time(k));
  }
  rep.max_step_distance = 0.0;
  for (double d : rep.step_distances)
    rep.max_step_distance = std::max(rep.max_step_distance, d);
  rep.shadowed = rep.max_step_distance < eps;
  rep.verdict = rep.shadowed ? ShadowVerdict::Shadowed
                             : ShadowVerdict::NotShadowedInFamily;
  return rep;
}

template <class Sys>
bool shadows(const Sys& sys, const typename Sys::point_t& y,
             const PseudoOrbit<typename Sys::point_t>& po, double eps) {
  auto fwd = y;
  for (int k = 0; k <= po.last_time(); ++k) {
    if (k > 0) fwd = sys.apply(fwd);
    if (sys.distance(fwd, po.at_time(k)) >= eps) return false;
  }
  auto bwd = y;
  for (int k = -1; k >= po.first_time(); --k) {
    bwd = sys.apply_inverse(bwd);
    if (sys.distance(bwd, po.at_time(k)) >= eps) return false;
  }
  return true;
}

template <class Sys>
std::pair<std::optional<typename Sys::point_t>, ShadowReport>
search_shadow_point(const Sys& sys,
                    const PseudoOrbit<typename Sys::point_t>& po, double eps,
                    const FinitePointSet<typename Sys::point_t>& net,
                    const std::vector<typename Sys::point_t>& extra) {
  if (net.mesh > eps / 2.0 + 1e-15)
    throw std::invalid_argument("search_shadow_point: net mesh > eps/2");
  std::vector<typename Sys::point_t> family = net.points;
  family.insert(family.end(), extra.begin(), extra.end());
  for (size_t i = 0; i < family.size(); ++i) {
    if (shadows(sys, family[i], po, eps)) {
      auto rep = verify_shadow(sys, family[i], po, eps);
      rep.method = "net-search";
      rep.mesh = net.mesh;
      rep.witness_index = static_cast<int>(i);
      return {family[i], rep};
    }
  }
  ShadowReport rep;
  rep.eps = eps;
  rep.delta = po.delta;
  rep.steps = po.size() - 1;
  rep.method = "net-search";
  rep.mesh = net.mesh;
  rep.verdict = ShadowVerdict::NotShadowedInFamily;
  rep.shadowed = false;
  return {std::nullopt, rep};
}

template <class Sys>
SimpleShadower<Sys>::SimpleShadower(const Sys& sys, double eps,
                                    double net_mesh)
    : sys_(sys) {
  if (!(eps > 0.0)) throw std::domain_error("shadower: eps <= 0");
  if (!sys.invertible())
    throw std::invalid_argument("shadower: system must be invertible");
  attractors_ = sys.attractors;
  repellers_ = sys.repellers;
  if (attractors_.empty() || repellers_.empty())
    throw std::invalid_argument("shadower: fixed sets not declared");
  params_.eps = eps;
  params_.net_mesh = net_mesh;

  // Per-component trapping balls of diameter < eps/2, kept disjoint.
  double sep = std::numeric_limits<double>::infinity();
  auto all = attractors_;
  all.insert(all.end(), repellers_.begin(), repellers_.end());
  for (size_t i = 0; i < all.size(); ++i)
    for (size_t j = i + 1; j < all.size(); ++j)
      sep = std::min(sep, sys.distance(all[i], all[j]));
  const double rmax = std::min(eps / 4.0, sep / 3.0);

  for (const auto& p : attractors_) {
    auto t = find_trapping_ball(sys, p, rmax, false, net_mesh);
    if (!t.found)
      throw std::invalid_argument("shadower: no trapping ball at an attractor");
    a_radius_.push_back(t.radius);
    a_image_radius_.push_back(t.image_radius);
    params_.attractor_radii.push_back(t.radius);
  }
  for (const auto& q : repellers_) {
    auto t = find_trapping_ball(sys, q, rmax, true, net_mesh);
    if (!t.found)
      throw std::invalid_argument("shadower: no trapping ball at a repeller");
    r_radius_.push_back(t.radius);
    r_image_radius_.push_back(t.image_radius);
    params_.repeller_radii.push_back(t.radius);
  }

  // Uniform escape time into the attractor trapping cores, over the net
  // outside U_P union f^{-1}(U_R).
  auto net = sys.net(net_mesh);
  int escape = 0;
  const int cap = 100000;
  for (const auto& x0 : net.points) {
    if (in_attractor_ball(x0) >= 0) continue;
    if (in_inverse_repeller_region(x0)) continue;
    auto x = x0;
    int n = 0;
    while (n < cap) {
      bool inside_core = false;
      for (size_t i = 0; i < attractors_.size(); ++i)
        if (sys.distance(x, attractors_[i]) <= a_image_radius_[i])
          inside_core = true;
      if (inside_core) break;
      x = sys.apply(x);
      ++n;
    }
    if (n >= cap)
      throw std::invalid_argument("shadower: a net point never escapes");
    escape = std::max(escape, n);
  }
  params_.escape_time = escape + 2;

  // Gap margins (exact for metric balls): eta below half of every margin.
  double gap = eps;
  for (size_t i = 0; i < attractors_.size(); ++i)
    gap = std::min(gap, a_radius_[i] - a_image_radius_[i]);
  for (size_t i = 0; i < repellers_.size(); ++i)
    gap = std::min(gap, r_radius_[i] - r_image_radius_[i]);
  params_.eta = 0.5 * std::min(eps, gap);

  // One-step expansion estimate on the net (consecutive pairs), padded.
  double lip = 1.0;
  for (size_t i = 0; i + 1 < net.points.size(); ++i) {
    double d = sys.distance(net.points[i], net.points[i + 1]);
    if (d <= 0.0 || d > 3.0 * net_mesh) continue;
    double df = sys.distance(sys.apply(net.points[i]), sys.apply(net.points[i + 1]));
    lip = std::max(lip, df / d);
    double db = sys.distance(sys.apply_inverse(net.points[i]),
                             sys.apply_inverse(net.points[i + 1]));
    lip = std::max(lip, db / d);
  }
  params_.lipschitz = lip * 1.25;

  // N-step divergence budget: delta * (L^N - 1) / (L - 1) <= eta / 2.
  double lsum = 0.0, lpow = 1.0;
  for (int i = 0; i < params_.escape_time; ++i) {
    lsum += lpow;
    lpow *= params_.lipschitz;
    if (lsum > 1e15) break;
  }
  params_.delta = 0.5 * std::min(params_.eta / lsum, params_.eta / params_.lipschitz);
}

template <class Sys>
int SimpleShadower<Sys>::in_attractor_ball(const point_t& x) const {
  for (size_t i = 0; i < attractors_.size(); ++i)
    if (sys_.distance(x, attractors_[i]) <= a_radius_[i])
      return static_cast<int>(i);
  return -1;
}

template <class Sys>
int SimpleShadower<Sys>::in_repeller_ball(const point_t& x) const {
  for (size_t i = 0; i < repellers_.size(); ++i)
    if (sys_.distance(x, repellers_[i]) <= r_radius_[i])
      return static_cast<int>(i);
  return -1;
}

template <class Sys>
bool SimpleShadower<Sys>::in_inverse_repeller_region(const point_t& x) const {
  return in_repeller_ball(sys_.apply(x)) >= 0;
}

template <class Sys>
typename SimpleShadower<Sys>::point_t SimpleShadower<Sys>::shadow_point(
    const PseudoOrbit<point_t>& po) const {
  if (po.back != 0)
    throw std::invalid_argument("shadow_point: one-sided pseudo-orbits only");
  if (po.max_jump > params_.delta)
    throw std::invalid_argument(
        "shadow_point: pseudo-orbit jumps above the certified threshold");
  bool all_attr = true, all_rep = true;
  for (const auto& x : po.points) {
    if (in_attractor_ball(x) < 0) all_attr = false;
    if (in_repeller_ball(x) < 0) all_rep = false;
  }
  if (all_attr) return attractors_[in_attractor_ball(po.points.front())];
  if (all_rep) return repellers_[in_repeller_ball(po.points.front())];
  // Least n with x_n outside f^{-1}(U_R); exists since f^{-1}(U_R) is inside
  // U_R and not every entry sits in U_R.
  int n = -1;
  for (int k = 0; k < po.size(); ++k) {
    if (!in_inverse_repeller_region(po.points[k])) {
      n = k;
      break;
    }
  }
  if (n < 0) return repellers_[in_repeller_ball(po.points.front())];
  auto y = po.points[n];
  for (int k = 0; k < n; ++k) y = sys_.apply_inverse(y);
  return y;
}

template <class Sys>
ModulusReport estimate_modulus(const Sys& sys, double eps, int trials,
                               const std::vector<double>& delta_grid,
                               int steps, std::uint64_t seed,
                               PerturbationMode mode) {
  for (size_t i = 1; i < delta_grid.size(); ++i)
    if (delta_grid[i] <= delta_grid[i - 1])
      throw std::domain_error("modulus: delta grid not ascending");
  ModulusReport report;
  report.eps = eps;
  report.steps = steps;
  auto net = sys.net(eps / 2.0);
  for (double delta : delta_grid) {
    ModulusRow row;
    row.delta = delta;
    row.trials = trials;
    for (int t = 0; t < trials; ++t) {
      std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (t + 1)) ^
                          std::hash<double>{}(delta));
      auto x0 = sys.sample_uniform(rng);
      auto po = generate_pseudo_orbit(sys, x0, delta, steps, rng, mode);
      // Constructive candidates f^{-n}(x_n): anchored pull-backs of the
      // pseudo-orbit, a strided sweep over anchors.
      std::vector<typename Sys::point_t> extra;
      if (sys.invertible()) {
        const int stride = std::max(1, po.size() / 128);
        for (int n = 0; n < po.size(); n += stride) {
          auto z = po.points[n];
          for (int k = 0; k < n; ++k) z = sys.apply_inverse(z);
          extra.push_back(z);
        }
      }
      auto [witness, rep] = search_shadow_point(sys, po, eps, net, extra);
      if (witness) ++row.shadowed;
    }
    report.table.push_back(row);
    if (row.shadowed == row.trials) report.best_delta = delta;
  }
  // best = largest all-pass entry
  report.best_delta.reset();
  for (const auto& row : report.table)
    if (row.shadowed == row.trials) report.best_delta = row.delta;
  return report;
}

}  // namespace shadowlab
