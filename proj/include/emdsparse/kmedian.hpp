#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "emdsparse/grid.hpp"

namespace emdsparse {

struct KMedianOptions {
  /// Enumerate every center set when C(candidates, k) is at most this.
  std::size_t exact_limit = 100000;
  /// Extra randomized starts for the local search.
  int restarts = 1;
  std::uint64_t seed = 0;
};

/// Weighted k-median of a nonnegative image under the l1 ground metric.
/// `centers[j]` is a pixel index and `weights[j]` the mass assigned to it;
/// `cost` = sum_p x_p * min_j |p - c_j|_1, which equals the EMD between the
/// image and its clustered k-sparse approximation.
struct KMedianResult {
  std::vector<std::size_t> centers;
  std::vector<double> weights;
  double cost = 0.0;
  bool exact = false;
};

/// Candidate centers are the grid spanned by the support's row and column
/// coordinates; an optimal l1 k-median always lies on it (each cluster's
/// coordinate-wise weighted median is optimal for that cluster). Exhaustive
/// when small enough, otherwise greedy seeding followed by median updates and
/// single-swap local search until no swap improves.
KMedianResult weighted_k_median(const GridImage& x, int k, const KMedianOptions& options = {});

/// The k-sparse image that puts each cluster's mass on its center.
GridImage clustered_image(int delta, const KMedianResult& clustering);

/// Number of k-subsets of an m-set, saturating at `cap + 1`.
std::size_t binomial_capped(std::size_t m, std::size_t k, std::size_t cap);

}  // namespace emdsparse
