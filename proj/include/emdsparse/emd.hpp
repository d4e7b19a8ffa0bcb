#pragma once

#include <cstddef>
#include <vector>

#include "emdsparse/grid.hpp"

namespace emdsparse {

/// One transport leg: `mass` units move from pixel `source` to pixel `sink`.
struct FlowEdge {
  std::size_t source = 0;
  std::size_t sink = 0;
  double mass = 0.0;
};

/// A transport plan between the positive and negative parts of a signed image.
/// Mass that cannot be matched is charged the penalty D = 2 * delta per unit.
struct FlowPlan {
  std::vector<FlowEdge> edges;
  double unmatched_mass = 0.0;
};

struct EmdResult {
  double cost = 0.0;
  FlowPlan plan;
};

/// D = 2 * delta: the per-unit price of creating or destroying mass.
inline double unmatched_penalty(int delta) { return 2.0 * delta; }

/// Sum of mass * |p - q|_1 over edges plus D * unmatched mass.
double flow_cost(const FlowPlan& plan, int delta);

/// Exact EMD between two nonnegative images of equal total mass (within 1e-9).
/// Throws std::invalid_argument on negative entries or a mass mismatch.
EmdResult emd_equal_mass(const GridImage& x, const GridImage& y);

/// Exact EMD norm of a signed image: minimum-cost flow from the positive part
/// to the negative part, with unmatched mass charged D per unit.
EmdResult emd_norm_with_plan(const GridImage& w);
double emd_norm(const GridImage& w);

/// emd_norm(a - b).
double emd_distance(const GridImage& a, const GridImage& b);

}  // namespace emdsparse
