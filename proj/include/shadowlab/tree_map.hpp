#pragma once

#include <memory>
#include <string>
#include <vector>

#include "shadowlab/interval_map.hpp"
#include "shadowlab/tree.hpp"

namespace shadowlab {

/// Continuous self-map of a metric tree. Structural maps evaluate exactly;
/// homeomorphisms expose an exact inverse.
class TreeMap {
 public:
  virtual ~TreeMap() = default;
  virtual Location apply(const TreeComplex& tree, Location loc) const = 0;
  virtual Location apply_inverse(const TreeComplex& tree, Location loc) const;
  virtual bool is_homeomorphism() const { return false; }
  virtual bool is_monotone() const { return is_homeomorphism(); }
  /// True when the image of an arc is the arc between endpoint images
  /// (holds for monotone maps of trees).
  virtual bool exact_arc_images() const { return is_monotone(); }
  virtual std::string describe() const = 0;
};

using TreeMapPtr = std::shared_ptr<const TreeMap>;

TreeMapPtr identity_tree_map();

/// A map assembled from invariant arcs ("pieces"). Each piece is a chain of
/// whole edges forming an arc; the map sends the piece to itself by an
/// increasing interval map in the arc-length parametrization (anchor end
/// at parameter 0). Pieces must cover all edges exactly once; shared
/// junction vertices must be fixed by the piece maps meeting there.
class ArcPieceMap final : public TreeMap {
 public:
  struct Piece {
    /// Edges in order along the arc; orient[i] true when the edge is
    /// traversed a->b while walking from the anchor.
    std::vector<EdgeId> edges;
    std::vector<bool> orient;
    IntervalMapPtr map;  // on [0,1], increasing, fixing 0 and 1
  };

  ArcPieceMap(const TreeComplex& tree, std::vector<Piece> pieces);

  Location apply(const TreeComplex& tree, Location loc) const override;
  Location apply_inverse(const TreeComplex& tree, Location loc) const override;
  bool is_homeomorphism() const override { return invertible_; }
  std::string describe() const override;

  const std::vector<Piece>& pieces() const { return pieces_; }
  int piece_of_edge(EdgeId e) const { return edge_piece_.at(e); }

 private:
  struct EdgeSpan {
    int piece;
    int index_in_piece;
    double s0;  // arc-length offset of the a-end within the piece
    double s1;
  };
  double piece_length(int p) const { return lengths_[p]; }
  std::vector<Piece> pieces_;
  std::vector<double> lengths_;
  std::vector<int> edge_piece_;
  std::vector<EdgeSpan> spans_;
  bool invertible_ = true;

  Location eval(const TreeComplex& tree, Location loc, bool inverse) const;
};

/// Arbitrary continuous interval map wrapped as a tree map on a single-edge
/// complex (test scaffolding for non-monotone behavior).
class IntervalTreeMap final : public TreeMap {
 public:
  IntervalTreeMap(IntervalMapPtr f, bool monotone, bool homeo)
      : f_(std::move(f)), monotone_(monotone), homeo_(homeo) {}
  Location apply(const TreeComplex& tree, Location loc) const override;
  Location apply_inverse(const TreeComplex& tree, Location loc) const override;
  bool is_homeomorphism() const override { return homeo_; }
  bool is_monotone() const override { return monotone_; }
  std::string describe() const override { return f_->describe(); }

 private:
  IntervalMapPtr f_;
  bool monotone_, homeo_;
};

/// Exact image of a subtree: span of the images of its corner points
/// (monotone maps carry arcs onto arcs). Falls back to dense sampling plus
/// span for maps without that guarantee; sample spacing is recorded via
/// `sampling_used`.
Subtree image_subtree(const TreeComplex& tree, const TreeMap& f,
                      const Subtree& a, bool* sampling_used = nullptr,
                      int samples_per_interval = 64);

/// Exact preimage of a subtree under a homeomorphism (span of inverse
/// images of corners). Throws for maps not flagged monotone.
Subtree preimage_subtree(const TreeComplex& tree, const TreeMap& f,
                         const Subtree& a);

}  // namespace shadowlab
