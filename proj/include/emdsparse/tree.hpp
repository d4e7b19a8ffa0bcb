#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "emdsparse/grid.hpp"

namespace emdsparse {

/// Rooted tree over groups of coefficients. Node 0 is the root and parents
/// precede children. Node v owns coefficients [offset(v), offset(v + 1)).
class CoefficientTree {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// One node per pyramid cell, one coefficient per node.
  static CoefficientTree pyramid(int delta);
  /// Node 0 holds the Haar constant; every cell above level 0 is a node
  /// holding its three difference coefficients.
  static CoefficientTree haar(int delta);

  std::size_t nodes() const { return parent_.size(); }
  std::size_t coefficients() const { return offset_.back(); }
  std::size_t parent(std::size_t v) const { return parent_[v]; }
  std::span<const std::size_t> children(std::size_t v) const {
    return {child_.data() + child_offset_[v], child_offset_[v + 1] - child_offset_[v]};
  }
  std::size_t offset(std::size_t v) const { return offset_[v]; }
  std::size_t cost(std::size_t v) const { return offset_[v + 1] - offset_[v]; }
  /// Node owning a coefficient.
  std::size_t node_of(std::size_t coefficient) const;

 private:
  CoefficientTree() = default;
  void finish();

  std::vector<std::size_t> parent_;
  std::vector<std::size_t> offset_;
  std::vector<std::size_t> child_offset_;
  std::vector<std::size_t> child_;
  std::size_t group_ = 1;
};

enum class ProjectionScore { energy, magnitude };

/// Rooted connected node set of total coefficient cost <= budget maximizing
/// the retained sum of y^2 (energy) or |y| (magnitude). Exact, O(nodes * budget).
/// Ties go to the smaller allocation, then to earlier children. Returns nodes sorted.
std::vector<std::size_t> tree_project_nodes(const CoefficientTree& tree, std::span<const double> y,
                                            std::size_t budget,
                                            ProjectionScore score = ProjectionScore::energy);

/// Coefficient indices (sorted) of tree_project_nodes.
std::vector<std::size_t> tree_project_support(const CoefficientTree& tree, std::span<const double> y,
                                              std::size_t budget,
                                              ProjectionScore score = ProjectionScore::energy);

/// y restricted to tree_project_support.
std::vector<double> tree_project(const CoefficientTree& tree, std::span<const double> y, std::size_t budget,
                                 ProjectionScore score = ProjectionScore::energy);

/// Indices of the K largest |y| entries (ties to the lower index), sorted.
std::vector<std::size_t> top_k_support(std::span<const double> y, std::size_t k);

std::vector<double> restrict_to(std::span<const double> y, std::span<const std::size_t> support);

enum class ModelKind { general_sparse, tree, tree_width, value_tree };

struct ModelSpec {
  ModelKind kind = ModelKind::tree;
  std::size_t K = 0;
  std::optional<std::size_t> s;
};

/// Membership of a pyramid coefficient vector in the model. value_tree also
/// demands y >= 0 and y_q >= 2 |y_children(q)|_1 (tolerance 1e-12, relative).
bool model_contains(const ModelSpec& spec, const PyramidCoeffs& y);

/// Membership in T_K over an arbitrary coefficient tree (supernodes count by cost).
bool tree_model_contains(const CoefficientTree& tree, std::span<const double> y, std::size_t K);

/// All cells on levels l - d .. l with d = ceil(log4 k), plus the root paths of
/// every pixel in `pixels`.
TreeSupport embed_sparse_in_tree(const Grid& grid, std::span<const std::size_t> pixels);

/// (4^(d+1) - 1) / 3 + k (l - d), capped at t: the size of embed_sparse_in_tree
/// for k pixels in general position.
std::size_t claim_tree_size_bound(int delta, std::size_t k);

/// Greedy projection onto the value-tree model with width s: top-down, keep the
/// s largest children of the kept cells at each level, then scale each kept
/// cell's children so they sum to at most half of it.
PyramidCoeffs project_value_tree(const PyramidCoeffs& y, std::size_t s);

}  // namespace emdsparse
