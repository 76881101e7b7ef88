#include "shadowlab/stage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace shadowlab {

namespace {

long long zig(long long j) { return j >= 0 ? 2 * j : -2 * j - 1; }

double star_coord_distance(int arm_a, double ra, int arm_b, double rb) {
  if (ra == 0.0 || rb == 0.0) return std::max(ra, rb);
  if (arm_a == arm_b) return std::abs(ra - rb);
  return ra + rb;
}

StagePoint on_tooth(const StagePoint& root, int seed, long long step, int arm,
                    double radius) {
  StagePoint p = root;
  p.chain.push_back(ToothCoord{seed, step, arm, radius});
  return p;
}

}  // namespace

double StageFamily::extent(int level, int seed, long long step) const {
  const auto& fam = levels_.at(level - 1);
  const long long idx =
      1 + seed + static_cast<long long>(fam.seeds.size()) * zig(step);
  double top = params_.top_extent;
  for (int l = 1; l < level; ++l) top *= params_.extent_ratio;
  return top / static_cast<double>(idx);
}

bool StageFamily::in_window(int level, int seed, long long step) const {
  if (level < 1 || level > static_cast<int>(levels_.size())) return false;
  const auto& fam = levels_[level - 1];
  if (seed < 0 || seed >= static_cast<int>(fam.seeds.size())) return false;
  return step >= fam.windows[seed].lo && step <= fam.windows[seed].hi;
}

StagePoint StageFamily::apply(const StagePoint& p) const {
  StagePoint q = p;
  q.base = base_map_->apply(p.base);
  for (size_t i = 0; i < q.chain.size(); ++i) {
    auto& c = q.chain[i];
    const int lvl = static_cast<int>(i) + 1;
    const double e_old = extent(lvl, c.seed, c.step);
    const double e_new = extent(lvl, c.seed, c.step + 1);
    const double u = c.radius / e_old;
    c.step += 1;
    c.radius = e_new * (u * u);
  }
  return q;
}

StagePoint StageFamily::apply_inverse(const StagePoint& p) const {
  StagePoint q = p;
  q.base = base_map_->apply_inverse(p.base);
  for (size_t i = 0; i < q.chain.size(); ++i) {
    auto& c = q.chain[i];
    const int lvl = static_cast<int>(i) + 1;
    const double e_cur = extent(lvl, c.seed, c.step);
    const double e_prev = extent(lvl, c.seed, c.step - 1);
    const double u = std::sqrt(c.radius / e_cur);
    c.step -= 1;
    c.radius = e_prev * u;
  }
  return q;
}

StagePoint StageFamily::iterate(const StagePoint& p, long long n) const {
  StagePoint q = p;
  if (n >= 0)
    for (long long i = 0; i < n; ++i) q = apply(q);
  else
    for (long long i = 0; i < -n; ++i) q = apply_inverse(q);
  return q;
}

StagePoint StageFamily::project(const StagePoint& p, int level) const {
  StagePoint q = p;
  if (static_cast<int>(q.chain.size()) > level)
    q.chain.resize(static_cast<size_t>(level));
  return q;
}

StagePoint StageFamily::canonical(StagePoint p) {
  while (!p.chain.empty() && p.chain.back().radius == 0.0) p.chain.pop_back();
  return p;
}

double StageFamily::distance(const StagePoint& a, const StagePoint& b) const {
  double d = std::abs(a.base - b.base);
  const int levels = std::max(a.level(), b.level());
  for (int l = 1; l <= levels; ++l) {
    const ToothCoord* ca = l <= a.level() ? &a.chain[l - 1] : nullptr;
    const ToothCoord* cb = l <= b.level() ? &b.chain[l - 1] : nullptr;
    double s = star_coord_distance(ca ? ca->arm : 0, ca ? ca->radius : 0.0,
                                   cb ? cb->arm : 0, cb ? cb->radius : 0.0);
    d = std::max(d, s);
  }
  return d;
}

std::vector<StagePoint> StageFamily::window_points(int l) const {
  const auto& fam = levels_.at(l - 1);
  std::vector<StagePoint> pts;
  for (size_t s = 0; s < fam.seeds.size(); ++s)
    for (long long j = fam.windows[s].lo; j <= fam.windows[s].hi; ++j)
      pts.push_back(iterate(fam.seeds[s], j));
  return pts;
}

std::shared_ptr<const StageFamily> StageFamily::build(const Params& params) {
  if (params.order < 3) throw std::domain_error("stage family: order < 3");
  if (params.stages < 1) throw std::domain_error("stage family: stages < 1");
  if (params.density < 1) throw std::domain_error("stage family: density < 1");
  auto family = std::make_shared<StageFamily>();
  family->params_ = params;
  family->base_map_ = square_map();
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  auto window_sizes = [&](int total, int chunk) {
    std::vector<int> sizes;
    int nseeds = (total + chunk - 1) / chunk;
    for (int i = 0; i < nseeds; ++i)
      sizes.push_back(total / nseeds + (i < total % nseeds ? 1 : 0));
    return sizes;
  };

  // Level 1: window points on the base around 1/2, avoiding the fixed ends
  // and the midpoint itself.
  {
    LevelFamily fam;
    if (!params.level1_seeds.empty()) {
      for (const auto& s : params.level1_seeds) {
        if (!(s.position > 0.0 && s.position < 1.0))
          throw std::invalid_argument("stage family: seed at a fixed point");
        StagePoint seed;
        seed.base = s.position;
        fam.seeds.push_back(seed);
        fam.windows.push_back(Window{-s.back, s.forward});
      }
    } else {
      auto sizes = window_sizes(params.density, 5);
      for (size_t s = 0; s < sizes.size(); ++s) {
        double off = (s % 2 == 0 ? 1.0 : -1.0) *
                     (0.0625 + 0.013 * static_cast<double>(s / 2)) +
                     0.004 * jitter(rng);
        StagePoint seed;
        seed.base = 0.5 + off;
        fam.seeds.push_back(seed);
        int w = sizes[s];
        long long lo = -(w / 2);
        long long hi = w - 1 + lo;
        fam.windows.push_back(Window{lo, hi});
      }
    }
    family->levels_.push_back(fam);
    // Validate the windowed orbit against the truncation margin.
    for (size_t s = 0; s < fam.seeds.size(); ++s) {
      for (long long j = fam.windows[s].lo; j <= fam.windows[s].hi; ++j) {
        double v = family->iterate(fam.seeds[s], j).base;
        if (v < params.gamma || v > 1.0 - params.gamma)
          throw std::invalid_argument(
              "stage family: window orbit reaches the fixed ends");
      }
    }
  }

  // Upper levels: seeds on the largest window teeth of the level below.
  const double u_cycle[] = {0.42, 0.78, 0.55, 0.30, 0.65, 0.22, 0.48, 0.70};
  for (int lvl = 2; lvl <= params.stages; ++lvl) {
    const auto& parent = family->levels_[lvl - 2];
    // Parent window teeth ordered by enumeration index (largest first).
    std::vector<std::pair<long long, std::pair<int, long long>>> cands;
    for (size_t s = 0; s < parent.seeds.size(); ++s)
      for (long long j = parent.windows[s].lo; j <= parent.windows[s].hi; ++j)
        cands.push_back({1 + static_cast<long long>(s) +
                             static_cast<long long>(parent.seeds.size()) *
                                 zig(j),
                         {static_cast<int>(s), j}});
    std::sort(cands.begin(), cands.end());

    LevelFamily fam;
    auto sizes = window_sizes(params.density, 3);
    for (size_t s = 0; s < sizes.size(); ++s) {
      auto [ps, pj] = cands[std::min(s / 2, cands.size() - 1)].second;
      double u = u_cycle[s % 8] + 0.01 * jitter(rng);
      int arm = static_cast<int>(s) % family->arms();
      StagePoint root = family->iterate(parent.seeds[ps], pj);
      double ext = family->extent(lvl - 1, ps, pj);
      StagePoint seed = on_tooth(root, ps, pj, arm, u * ext);
      int w = sizes[s];
      long long lo = -(w / 2);
      long long hi = w - 1 + lo;
      // Clip to the parent window so every windowed tooth stays real.
      lo = std::max(lo, parent.windows[ps].lo - pj);
      hi = std::min(hi, parent.windows[ps].hi - pj);
      if (lo > hi)
        throw std::invalid_argument("stage family: seed window collapsed");
      fam.seeds.push_back(seed);
      fam.windows.push_back(Window{lo, hi});
    }
    family->levels_.push_back(fam);
  }
  return family;
}

// ---------------------------------------------------------------------------

StageSpace::StageSpace(StageFamilyPtr family, int level)
    : family_(std::move(family)), level_(level) {
  if (level_ < 0 || level_ > family_->stage_count())
    throw std::domain_error("stage space: bad level");
  build_complex();
}

void StageSpace::build_complex() {
  std::vector<StagePoint> vpoints;
  std::vector<TreeComplex::Edge> edges;
  std::vector<EdgeGeom> geoms;
  auto add_vertex = [&](const StagePoint& p) {
    vpoints.push_back(p);
    return static_cast<VertexId>(vpoints.size() - 1);
  };
  auto add_edge = [&](VertexId a, VertexId b, const StagePoint& pa,
                      const StagePoint& pb, int varying, double c0,
                      double c1) {
    edges.push_back(TreeComplex::Edge{a, b, std::abs(c1 - c0)});
    geoms.push_back(EdgeGeom{varying, pa, pb, c0, c1});
    return static_cast<EdgeId>(edges.size() - 1);
  };

  // Base line.
  std::vector<double> values{0.0, 1.0};
  if (level_ >= 1)
    for (const auto& p : family_->window_points(1)) values.push_back(p.base);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<VertexId> base_vids;
  for (double v : values) {
    StagePoint p;
    p.base = v;
    base_vids.push_back(add_vertex(p));
  }
  base_values_ = values;
  for (size_t i = 0; i + 1 < values.size(); ++i) {
    base_edges_.push_back(add_edge(base_vids[i], base_vids[i + 1],
                                   vpoints[base_vids[i]],
                                   vpoints[base_vids[i + 1]], 0, values[i],
                                   values[i + 1]));
  }

  // Registry of D-point vertices: key = (level of the tooth family, seed,
  // step) of the D point itself.
  std::map<std::tuple<int, int, long long>, VertexId> dpoint_vertex;
  for (size_t i = 0; i < values.size(); ++i) {
    // Level-1 roots are base vertices; find their (seed, step) identities.
    if (level_ < 1) break;
    const auto& fam = family_->level(1);
    for (size_t s = 0; s < fam.seeds.size(); ++s)
      for (long long j = fam.windows[s].lo; j <= fam.windows[s].hi; ++j)
        if (family_->iterate(fam.seeds[s], j).base == values[i])
          dpoint_vertex[{1, static_cast<int>(s), j}] = base_vids[i];
  }

  for (int lvl = 1; lvl <= level_; ++lvl) {
    const auto& fam = family_->level(lvl);
    // Subdividers: window points of the next level grouped by their tooth.
    std::map<std::tuple<int, long long, int>,
             std::vector<std::pair<double, std::pair<int, long long>>>>
        subdividers;
    if (lvl + 1 <= level_) {
      const auto& next = family_->level(lvl + 1);
      for (size_t s2 = 0; s2 < next.seeds.size(); ++s2) {
        for (long long j2 = next.windows[s2].lo; j2 <= next.windows[s2].hi;
             ++j2) {
          StagePoint p = family_->iterate(next.seeds[s2], j2);
          const auto& top = p.chain.back();
          subdividers[{top.seed, top.step, top.arm}].push_back(
              {top.radius, {static_cast<int>(s2), j2}});
        }
      }
    }
    for (size_t s = 0; s < fam.seeds.size(); ++s) {
      for (long long j = fam.windows[s].lo; j <= fam.windows[s].hi; ++j) {
        auto root_it = dpoint_vertex.find({lvl, static_cast<int>(s), j});
        if (root_it == dpoint_vertex.end())
          throw std::logic_error("stage space: missing root vertex");
        VertexId root_vid = root_it->second;
        StagePoint root = family_->iterate(fam.seeds[s], j);
        double ext = family_->extent(lvl, static_cast<int>(s), j);
        for (int arm = 0; arm < family_->arms(); ++arm) {
          std::vector<std::pair<double, std::pair<int, long long>>> subs;
          auto it = subdividers.find({static_cast<int>(s), j, arm});
          if (it != subdividers.end()) subs = it->second;
          std::sort(subs.begin(), subs.end());
          ArmGeom ag;
          ag.radii.push_back(0.0);
          std::vector<VertexId> vids{root_vid};
          for (const auto& [r, id] : subs) {
            StagePoint p = on_tooth(root, static_cast<int>(s), j, arm, r);
            VertexId vid = add_vertex(p);
            dpoint_vertex[{lvl + 1, id.first, id.second}] = vid;
            ag.radii.push_back(r);
            vids.push_back(vid);
          }
          ag.radii.push_back(ext);
          vids.push_back(
              add_vertex(on_tooth(root, static_cast<int>(s), j, arm, ext)));
          for (size_t i = 0; i + 1 < ag.radii.size(); ++i) {
            StagePoint pa =
                on_tooth(root, static_cast<int>(s), j, arm, ag.radii[i]);
            StagePoint pb =
                on_tooth(root, static_cast<int>(s), j, arm, ag.radii[i + 1]);
            ag.edges.push_back(add_edge(vids[i], vids[i + 1], pa, pb, lvl,
                                        ag.radii[i], ag.radii[i + 1]));
          }
          arm_geom_[{lvl, static_cast<int>(s), j, arm}] = std::move(ag);
        }
      }
    }
  }

  complex_ = std::make_shared<TreeComplex>(static_cast<int>(vpoints.size()),
                                           std::move(edges));
  geom_ = std::move(geoms);
  (void)vpoints;
}

double StageSpace::diameter() const {
  double best = 0.0;
  std::vector<StagePoint> vps;
  for (EdgeId e = 0; e < complex_->edge_count(); ++e) {
    vps.push_back(geom_[e].p0);
    vps.push_back(geom_[e].p1);
  }
  for (size_t i = 0; i < vps.size(); ++i)
    for (size_t j = i + 1; j < vps.size(); ++j)
      best = std::max(best, family_->distance(vps[i], vps[j]));
  return best;
}

StagePoint StageSpace::location_point(Location loc) const {
  complex_->check_location(loc);
  const auto& g = geom_.at(loc.edge);
  StagePoint p = g.p0;
  double c = g.c0 + (g.c1 - g.c0) * loc.t;
  if (g.varying_level == 0)
    p.base = c;
  else
    p.chain[g.varying_level - 1].radius = c;
  return StageFamily::canonical(std::move(p));
}

std::optional<Location> StageSpace::point_location(const StagePoint& p) const {
  StagePoint q = StageFamily::canonical(p);
  if (q.level() > level_) return std::nullopt;
  if (q.chain.empty()) {
    double b = q.base;
    if (b < 0.0 || b > 1.0) return std::nullopt;
    auto it = std::upper_bound(base_values_.begin(), base_values_.end(), b);
    size_t i = std::min(base_values_.size() - 2,
                        static_cast<size_t>(
                            std::max<std::ptrdiff_t>(1, it - base_values_.begin())) -
                            1);
    double v0 = base_values_[i], v1 = base_values_[i + 1];
    return complex_->canonical(Location{base_edges_[i], (b - v0) / (v1 - v0)});
  }
  const auto& top = q.chain.back();
  auto it = arm_geom_.find({q.level(), top.seed, top.step, top.arm});
  if (it == arm_geom_.end()) return std::nullopt;
  const auto& ag = it->second;
  double r = top.radius;
  if (r > ag.radii.back() + 1e-12) return std::nullopt;
  auto rit = std::upper_bound(ag.radii.begin(), ag.radii.end(), r);
  size_t i = std::min(
      ag.radii.size() - 2,
      static_cast<size_t>(std::max<std::ptrdiff_t>(1, rit - ag.radii.begin())) -
          1);
  double r0 = ag.radii[i], r1 = ag.radii[i + 1];
  return complex_->canonical(Location{ag.edges[i], (r - r0) / (r1 - r0)});
}

FinitePointSet<StagePoint> StageSpace::epsilon_net(double eps) const {
  if (!(eps > 0.0)) throw std::domain_error("epsilon_net: eps <= 0");
  FinitePointSet<StagePoint> net;
  net.mesh = eps;
  std::vector<bool> vertex_done(complex_->vertex_count(), false);
  for (EdgeId e = 0; e < complex_->edge_count(); ++e) {
    const auto& ed = complex_->edge(e);
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
      net.points.push_back(
          location_point(Location{e, static_cast<double>(i) / steps}));
    }
  }
  return net;
}

double StageSpace::point_to_subtree(const StagePoint& p,
                                    const Subtree& s) const {
  if (s.empty()) throw std::domain_error("distance to empty subtree");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& iv : s.intervals()) {
    const auto& g = geom_.at(iv.edge);
    // Candidate parameters: interval ends plus the kink of the varying
    // coordinate term (distance in t is a max of convex piecewise-linear
    // functions with at most one kink).
    double cands[3] = {iv.t0, iv.t1, iv.t0};
    int ncand = 2;
    double target = -1.0;
    if (g.varying_level == 0) {
      target = p.base;
    } else if (g.varying_level <= p.level()) {
      const auto& pc = p.chain[g.varying_level - 1];
      const auto& ec = g.p0.chain[g.varying_level - 1];
      if (pc.radius > 0.0 && pc.arm == ec.arm) target = pc.radius;
    }
    if (target >= 0.0 && g.c1 != g.c0) {
      double tk = (target - g.c0) / (g.c1 - g.c0);
      if (tk > iv.t0 && tk < iv.t1) cands[ncand++] = tk;
    }
    for (int c = 0; c < ncand; ++c) {
      best = std::min(best,
                      family_->distance(p, location_point(Location{iv.edge,
                                                                   cands[c]})));
    }
    if (best == 0.0) break;
  }
  return best;
}

Location StageSpace::nearest_loc_in_subtree(const StagePoint& p,
                                            const Subtree& s) const {
  if (s.empty()) throw std::domain_error("nearest point of empty subtree");
  double best = std::numeric_limits<double>::infinity();
  Location best_loc{0, 0.0};
  for (const auto& iv : s.intervals()) {
    const auto& g = geom_.at(iv.edge);
    double cands[3] = {iv.t0, iv.t1, iv.t0};
    int ncand = 2;
    double target = -1.0;
    if (g.varying_level == 0) {
      target = p.base;
    } else if (g.varying_level <= p.level()) {
      const auto& pc = p.chain[g.varying_level - 1];
      const auto& ec = g.p0.chain[g.varying_level - 1];
      if (pc.radius > 0.0 && pc.arm == ec.arm) target = pc.radius;
    }
    if (target >= 0.0 && g.c1 != g.c0) {
      double tk = (target - g.c0) / (g.c1 - g.c0);
      if (tk > iv.t0 && tk < iv.t1) cands[ncand++] = tk;
    }
    for (int c = 0; c < ncand; ++c) {
      Location cand{iv.edge, cands[c]};
      double d = family_->distance(p, location_point(cand));
      if (d < best) {
        best = d;
        best_loc = cand;
      }
    }
  }
  return complex_->canonical(best_loc);
}

std::vector<std::pair<double, double>> StageSpace::base_value_intervals(
    const Subtree& s) const {
  std::vector<std::pair<double, double>> vals;
  for (const auto& iv : s.intervals()) {
    const auto& g = geom_.at(iv.edge);
    if (g.varying_level != 0) continue;
    double a = g.c0 + (g.c1 - g.c0) * iv.t0;
    double b = g.c0 + (g.c1 - g.c0) * iv.t1;
    vals.push_back({std::min(a, b), std::max(a, b)});
  }
  // Roots covered only through a tooth stub contribute their value.
  for (size_t i = 0; i < base_vids_.size(); ++i)
    if (s.touches_vertex(*complex_, base_vids_[i]))
      vals.push_back({base_values_[i], base_values_[i]});
  std::sort(vals.begin(), vals.end());
  std::vector<std::pair<double, double>> merged;
  for (auto& p : vals) {
    if (!merged.empty() && p.first <= merged.back().second + 1e-12)
      merged.back().second = std::max(merged.back().second, p.second);
    else
      merged.push_back(p);
  }
  return merged;
}

std::vector<std::pair<double, double>> StageSpace::arm_value_intervals(
    const Subtree& s, int level, int seed, long long step, int arm) const {
  std::vector<std::pair<double, double>> vals;
  auto it = arm_geom_.find({level, seed, step, arm});
  if (it == arm_geom_.end()) return vals;
  for (EdgeId e : it->second.edges) {
    const auto& g = geom_.at(e);
    for (const auto& iv : s.intervals()) {
      if (iv.edge != e) continue;
      double a = g.c0 + (g.c1 - g.c0) * iv.t0;
      double b = g.c0 + (g.c1 - g.c0) * iv.t1;
      vals.push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(vals.begin(), vals.end());
  std::vector<std::pair<double, double>> merged;
  for (auto& p : vals) {
    if (!merged.empty() && p.first <= merged.back().second + 1e-12)
      merged.back().second = std::max(merged.back().second, p.second);
    else
      merged.push_back(p);
  }
  return merged;
}

Subtree StageSpace::from_base_values(
    const std::vector<std::pair<double, double>>& vals) const {
  std::vector<Subtree::Interval> out;
  for (const auto& [lo, hi] : vals) {
    for (size_t i = 0; i + 1 < base_values_.size(); ++i) {
      double v0 = base_values_[i], v1 = base_values_[i + 1];
      double a = std::max(lo, v0), b = std::min(hi, v1);
      if (a <= b + 1e-15)
        out.push_back(Subtree::Interval{base_edges_[i], (a - v0) / (v1 - v0),
                                        (std::max(a, b) - v0) / (v1 - v0)});
    }
  }
  return Subtree(std::move(out)).normalized(*complex_);
}

Subtree StageSpace::map_preimage(const Subtree& s) const {
  if (s.empty()) throw std::domain_error("preimage of empty subtree");
  auto base_vals = base_value_intervals(s);
  auto h = square_map();
  std::vector<Subtree::Interval> out;
  for (EdgeId e = 0; e < complex_->edge_count(); ++e) {
    const auto& g = geom_[e];
    if (g.varying_level == 0) {
      double i0 = g.c0 * g.c0, i1 = g.c1 * g.c1;  // image range under x^2
      for (const auto& [lo, hi] : base_vals) {
        double a = std::max(lo, i0), b = std::min(hi, i1);
        if (a > b + 1e-15) continue;
        double t0 = (std::sqrt(a) - g.c0) / (g.c1 - g.c0);
        double t1 = (std::sqrt(std::max(a, b)) - g.c0) / (g.c1 - g.c0);
        out.push_back(Subtree::Interval{e, t0, t1});
      }
      continue;
    }
    const int lvl = g.varying_level;
    const auto& tc = g.p0.chain[lvl - 1];
    if (!family_->in_window(lvl, tc.seed, tc.step + 1)) continue;
    const double e_old = family_->extent(lvl, tc.seed, tc.step);
    const double e_new = family_->extent(lvl, tc.seed, tc.step + 1);
    auto rho = [&](double r) {
      double u = r / e_old;
      return e_new * u * u;
    };
    auto rho_inv = [&](double v) { return e_old * std::sqrt(v / e_new); };
    auto arm_vals =
        arm_value_intervals(s, lvl, tc.seed, tc.step + 1, tc.arm);
    double i0 = rho(g.c0), i1 = rho(g.c1);
    for (const auto& [lo, hi] : arm_vals) {
      double a = std::max(lo, i0), b = std::min(hi, i1);
      if (a > b + 1e-15) continue;
      double t0 = (rho_inv(a) - g.c0) / (g.c1 - g.c0);
      double t1 = (rho_inv(std::max(a, b)) - g.c0) / (g.c1 - g.c0);
      out.push_back(Subtree::Interval{e, t0, t1});
    }
  }
  return Subtree(std::move(out)).normalized(*complex_);
}

Subtree StageSpace::base_subtree_image(const Subtree& s) const {
  for (const auto& iv : s.intervals())
    if (geom_.at(iv.edge).varying_level != 0)
      throw std::invalid_argument(
          "stage image: only base subtrees are exactly representable");
  auto vals = base_value_intervals(s);
  std::vector<std::pair<double, double>> image;
  for (auto& [lo, hi] : vals) image.push_back({lo * lo, hi * hi});
  return from_base_values(image);
}

Subtree StageSpace::bonding_preimage(const StageSpace& coarser,
                                     const Subtree& s) const {
  if (coarser.level_ != level_ - 1 || coarser.family_ != family_)
    throw std::invalid_argument("bonding preimage: stages not adjacent");
  auto base_vals = coarser.base_value_intervals(s);
  std::vector<Subtree::Interval> out;
  for (EdgeId e = 0; e < complex_->edge_count(); ++e) {
    const auto& g = geom_[e];
    if (g.varying_level == 0) {
      for (const auto& [lo, hi] : base_vals) {
        double a = std::max(lo, g.c0), b = std::min(hi, g.c1);
        if (a <= b + 1e-15)
          out.push_back(Subtree::Interval{e, (a - g.c0) / (g.c1 - g.c0),
                                          (std::max(a, b) - g.c0) /
                                              (g.c1 - g.c0)});
      }
      continue;
    }
    const int lvl = g.varying_level;
    const auto& tc = g.p0.chain[lvl - 1];
    if (lvl <= coarser.level_) {
      auto arm_vals =
          coarser.arm_value_intervals(s, lvl, tc.seed, tc.step, tc.arm);
      for (const auto& [lo, hi] : arm_vals) {
        double a = std::max(lo, g.c0), b = std::min(hi, g.c1);
        if (a <= b + 1e-15)
          out.push_back(Subtree::Interval{e, (a - g.c0) / (g.c1 - g.c0),
                                          (std::max(a, b) - g.c0) /
                                              (g.c1 - g.c0)});
      }
    } else {
      // Whole teeth over D-points inside the coarser subtree.
      StagePoint root = family_->project(g.p0, lvl - 1);
      if (coarser.point_to_subtree(root, s) <= 1e-12)
        out.push_back(Subtree::Interval{e, 0.0, 1.0});
    }
  }
  return Subtree(std::move(out)).normalized(*complex_);
}

// ---------------------------------------------------------------------------

StagePoint StageSystem::sample_uniform(std::mt19937_64& rng) const {
  Location loc =
      sample_subtree(space->complex(), Subtree::whole(space->complex()), rng);
  return space->location_point(loc);
}

StagePoint StageSystem::sample_ball(const StagePoint& c, double r,
                                    std::mt19937_64& rng) const {
  StagePoint q = StageFamily::canonical(c);
  std::uniform_real_distribution<double> u(-r, r);
  bool base_move = q.chain.empty() || (rng() & 1u);
  if (base_move) {
    q.base = std::clamp(q.base + u(rng), 0.0, 1.0);
  } else {
    auto& tc = q.chain.back();
    double ext = family->extent(q.level(), tc.seed, tc.step);
    tc.radius = std::clamp(tc.radius + u(rng), 0.0, ext);
  }
  return StageFamily::canonical(std::move(q));
}

namespace {

StageSystem wrap_stage(StageFamilyPtr family, int level, std::string name) {
  StageSystem sys;
  sys.family = family;
  sys.space = std::make_shared<StageSpace>(family, level);
  StagePoint p, q;
  p.base = 0.0;
  q.base = 1.0;
  sys.attractors = {p};
  sys.repellers = {q};
  sys.name = std::move(name);
  return sys;
}

}  // namespace

std::vector<StageSystem> build_universal_stages(
    const StageFamily::Params& params) {
  auto family = StageFamily::build(params);
  std::vector<StageSystem> stages;
  for (int k = 0; k <= params.stages; ++k) {
    stages.push_back(wrap_stage(family, k,
                                "stage" + std::to_string(k) + "[n=" +
                                    std::to_string(params.order) + "]"));
  }
  return stages;
}

StageSystem make_comb_system(const std::vector<CombSeed>& seeds,
                             int tooth_order, double top_extent) {
  if (seeds.empty()) throw std::domain_error("comb: no seeds");
  StageFamily::Params params;
  params.order = tooth_order;
  params.stages = 1;
  params.top_extent = top_extent;
  for (const auto& s : seeds)
    params.level1_seeds.push_back(
        StageFamily::Level1Seed{s.position, s.back, s.forward});
  auto family = StageFamily::build(params);
  return wrap_stage(family, 1,
                    "comb[n=" + std::to_string(tooth_order) +
                        ",seeds=" + std::to_string(seeds.size()) + "]");
}

StageSystem make_stage1_comb() {
  StageFamily::Params params;
  params.order = 3;
  params.stages = 1;
  params.density = 8;
  params.top_extent = 1.0;
  return build_universal_stages(params).back();
}

double branch_density_radius(const StageSystem& sys, double grid_mesh) {
  const auto& tree = sys.complex();
  std::vector<StagePoint> branches;
  for (VertexId v = 0; v < tree.vertex_count(); ++v)
    if (tree.degree(v) >= 3)
      branches.push_back(sys.space->location_point(tree.vertex_location(v)));
  if (branches.empty()) return std::numeric_limits<double>::infinity();
  auto net = sys.net(grid_mesh);
  double radius = 0.0;
  for (const auto& x : net.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : branches) best = std::min(best, sys.distance(x, b));
    radius = std::max(radius, best);
  }
  return radius;
}

}  // namespace shadowlab
