#include "shadowlab/tree_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shadowlab {

Location TreeMap::apply_inverse(const TreeComplex&, Location) const {
  throw std::logic_error("tree map: no inverse");
}

namespace {

class IdentityTreeMap final : public TreeMap {
 public:
  Location apply(const TreeComplex& tree, Location loc) const override {
    return tree.canonical(loc);
  }
  Location apply_inverse(const TreeComplex& tree, Location loc) const override {
    return tree.canonical(loc);
  }
  bool is_homeomorphism() const override { return true; }
  std::string describe() const override { return "identity"; }
};

}  // namespace

TreeMapPtr identity_tree_map() { return std::make_shared<IdentityTreeMap>(); }

ArcPieceMap::ArcPieceMap(const TreeComplex& tree, std::vector<Piece> pieces)
    : pieces_(std::move(pieces)) {
  edge_piece_.assign(tree.edge_count(), -1);
  spans_.assign(tree.edge_count(), EdgeSpan{-1, -1, 0.0, 0.0});
  lengths_.assign(pieces_.size(), 0.0);
  for (int p = 0; p < static_cast<int>(pieces_.size()); ++p) {
    const Piece& piece = pieces_[p];
    if (piece.edges.size() != piece.orient.size() || piece.edges.empty())
      throw std::domain_error("arc piece: bad edge list");
    if (!piece.map || !piece.map->invertible()) invertible_ = false;
    double s = 0.0;
    for (size_t i = 0; i < piece.edges.size(); ++i) {
      EdgeId e = piece.edges[i];
      if (edge_piece_.at(e) != -1)
        throw std::domain_error("arc piece: edge in two pieces");
      edge_piece_[e] = p;
      double len = tree.edge(e).length;
      double a_off = piece.orient[i] ? s : s + len;
      double b_off = piece.orient[i] ? s + len : s;
      spans_[e] = EdgeSpan{p, static_cast<int>(i), a_off, b_off};
      s += len;
    }
    lengths_[p] = s;
  }
  for (EdgeId e = 0; e < tree.edge_count(); ++e)
    if (edge_piece_[e] == -1)
      throw std::domain_error("arc piece: uncovered edge");
}

Location ArcPieceMap::eval(const TreeComplex& tree, Location loc,
                           bool inverse) const {
  loc = tree.canonical(loc);
  const EdgeSpan& span = spans_.at(loc.edge);
  const Piece& piece = pieces_[span.piece];
  const double L = lengths_[span.piece];
  double s = span.s0 + (span.s1 - span.s0) * loc.t;
  double u = s / L;
  double v = inverse ? piece.map->apply_inverse(u) : piece.map->apply(u);
  double target = std::clamp(v, 0.0, 1.0) * L;
  // Walk the piece to arc offset `target`.
  double acc = 0.0;
  for (size_t i = 0; i < piece.edges.size(); ++i) {
    EdgeId e = piece.edges[i];
    double len = tree.edge(e).length;
    if (target <= acc + len || i + 1 == piece.edges.size()) {
      double local = std::clamp((target - acc) / len, 0.0, 1.0);
      double t = piece.orient[i] ? local : 1.0 - local;
      return tree.canonical(Location{e, t});
    }
    acc += len;
  }
  throw std::logic_error("arc piece: walk failed");
}

Location ArcPieceMap::apply(const TreeComplex& tree, Location loc) const {
  return eval(tree, loc, false);
}

Location ArcPieceMap::apply_inverse(const TreeComplex& tree,
                                    Location loc) const {
  if (!invertible_) throw std::logic_error("arc piece map: not invertible");
  return eval(tree, loc, true);
}

std::string ArcPieceMap::describe() const {
  std::string out = "arc-pieces(";
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (i) out += ",";
    out += pieces_[i].map->describe();
  }
  return out + ")";
}

Location IntervalTreeMap::apply(const TreeComplex& tree, Location loc) const {
  loc = tree.canonical(loc);
  if (tree.edge_count() != 1)
    throw std::domain_error("interval tree map: single-edge complex only");
  return tree.canonical(Location{0, f_->apply(loc.t)});
}

Location IntervalTreeMap::apply_inverse(const TreeComplex& tree,
                                        Location loc) const {
  if (!homeo_) throw std::logic_error("interval tree map: not invertible");
  loc = tree.canonical(loc);
  return tree.canonical(Location{0, f_->apply_inverse(loc.t)});
}

Subtree image_subtree(const TreeComplex& tree, const TreeMap& f,
                      const Subtree& a, bool* sampling_used,
                      int samples_per_interval) {
  if (a.empty()) throw std::domain_error("image of empty subtree");
  std::vector<Location> pts;
  if (f.exact_arc_images()) {
    if (sampling_used) *sampling_used = false;
    for (const auto& c : a.corner_points(tree)) pts.push_back(f.apply(tree, c));
  } else {
    if (sampling_used) *sampling_used = true;
    for (const auto& iv : a.intervals()) {
      for (int i = 0; i <= samples_per_interval; ++i) {
        double t = iv.t0 + (iv.t1 - iv.t0) * i / samples_per_interval;
        pts.push_back(f.apply(tree, Location{iv.edge, t}));
      }
    }
  }
  return Subtree::span(tree, pts);
}

Subtree preimage_subtree(const TreeComplex& tree, const TreeMap& f,
                         const Subtree& a) {
  if (!f.is_monotone())
    throw std::invalid_argument("preimage_subtree: map not flagged monotone");
  if (a.empty()) throw std::domain_error("preimage of empty subtree");
  if (f.is_homeomorphism()) {
    std::vector<Location> pts;
    for (const auto& c : a.corner_points(tree))
      pts.push_back(f.apply_inverse(tree, c));
    return Subtree::span(tree, pts);
  }
  throw std::invalid_argument(
      "preimage_subtree: monotone non-invertible maps need a structural "
      "preimage (see comb projection)");
}

}  // namespace shadowlab
