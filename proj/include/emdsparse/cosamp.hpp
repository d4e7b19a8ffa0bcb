#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "emdsparse/tree.hpp"

namespace emdsparse {

/// m x t matrix of i.i.d. N(0, 1) / sqrt(m) entries drawn from mt19937_64(seed).
struct DenseSketch {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd matrix;

  Eigen::VectorXd apply(std::span<const double> y) const;
};

/// Regenerates the same entries for the same (rows, cols, seed).
DenseSketch make_dense_sketch(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// m = ceil(c_rows * K) rows. Throws std::invalid_argument when m > t or m == 0.
DenseSketch build_dense_sketch(std::size_t t, std::size_t K, double c_rows, std::uint64_t seed);

/// Support selector: returns the sorted coefficient indices of the model
/// projection of `proxy` at the given budget.
using Projector = std::function<std::vector<std::size_t>(std::span<const double> proxy, std::size_t budget)>;

Projector tree_projector(const CoefficientTree& tree);
Projector top_k_projector();

struct CosampOptions {
  int max_iters = 30;
  /// Stop once the residual fails to shrink by more than this fraction.
  double min_relative_decrease = 1e-6;
};

struct CosampResult {
  std::vector<double> y;
  std::vector<std::size_t> support;
  int iterations = 0;
  double residual_norm = 0.0;
  double first_residual_norm = 0.0;
  /// A least-squares step fell back to the ridge solve.
  bool regularized = false;
};

/// Model-based CoSaMP. Each iteration merges the 2K-projection of the proxy
/// A^T r with the current support, fits b by least squares on those columns,
/// then prunes with the 2K-projection. The iterate with smallest residual wins.
CosampResult model_cosamp(const DenseSketch& A, const Eigen::VectorXd& b, std::size_t K,
                          const Projector& project, const CosampOptions& options = {});

/// Tree-model wrapper: model_cosamp over `tree` with budget K, so the output
/// lies in T_2K.
CosampResult l1l1_tree_recover(const DenseSketch& A, const Eigen::VectorXd& b, const CoefficientTree& tree,
                               std::size_t K, const CosampOptions& options = {});

/// min over y' in T_K of |y - y'|_1, using the magnitude-score projection.
double best_tree_l1_error(const CoefficientTree& tree, std::span<const double> y, std::size_t K);

}  // namespace emdsparse
