#include "emdsparse/cosamp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace emdsparse {

Eigen::VectorXd DenseSketch::apply(std::span<const double> y) const {
  if (y.size() != cols) throw std::invalid_argument("vector length does not match sketch");
  return matrix * Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

DenseSketch make_dense_sketch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  DenseSketch a{rows, cols, seed, Eigen::MatrixXd(rows, cols)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = rows ? 1.0 / std::sqrt(double(rows)) : 0.0;
  // Column-major fill so a column's entries are contiguous in the stream.
  for (Eigen::Index c = 0; c < a.matrix.cols(); ++c)
    for (Eigen::Index r = 0; r < a.matrix.rows(); ++r) a.matrix(r, c) = normal(rng) * scale;
  return a;
}

DenseSketch build_dense_sketch(std::size_t t, std::size_t K, double c_rows, std::uint64_t seed) {
  if (!(c_rows > 0.0)) throw std::invalid_argument("c_rows must be positive");
  const auto m = static_cast<std::size_t>(std::ceil(c_rows * double(K)));
  if (m == 0) throw std::invalid_argument("sketch needs at least one row");
  if (m > t) throw std::invalid_argument("sketch rows exceed coefficient count");
  return make_dense_sketch(m, t, seed);
}

Projector tree_projector(const CoefficientTree& tree) {
  return [&tree](std::span<const double> proxy, std::size_t budget) {
    return tree_project_support(tree, proxy, budget, ProjectionScore::energy);
  };
}

Projector top_k_projector() {
  return [](std::span<const double> proxy, std::size_t budget) { return top_k_support(proxy, budget); };
}

namespace {

struct Fit {
  Eigen::VectorXd z;
  bool regularized = false;
};

Fit least_squares(const Eigen::MatrixXd& sub, const Eigen::VectorXd& b) {
  Fit fit;
  if (sub.cols() == 0) return fit;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
  if (qr.rank() == sub.cols()) {
    fit.z = qr.solve(b);
    return fit;
  }
  const Eigen::MatrixXd gram = sub.transpose() * sub;
  const double lambda = 1e-10 * std::max(gram.trace(), 1e-300);
  fit.z = (gram + lambda * Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).ldlt().solve(sub.transpose() * b);
  fit.regularized = true;
  return fit;
}

}  // namespace

CosampResult model_cosamp(const DenseSketch& A, const Eigen::VectorXd& b, std::size_t K,
                          const Projector& project, const CosampOptions& options) {
  if (b.size() != static_cast<Eigen::Index>(A.rows)) throw std::invalid_argument("measurement length mismatch");
  const std::size_t t = A.cols;
  CosampResult best;
  best.y.assign(t, 0.0);
  best.residual_norm = b.norm();
  best.first_residual_norm = best.residual_norm;

  std::vector<double> y(t, 0.0);
  std::vector<std::size_t> support;
  Eigen::VectorXd r = b;
  double previous = b.norm();
  bool regularized = false;
  for (int it = 1; it <= options.max_iters; ++it) {
    if (previous == 0.0) {
      best.iterations = it;
      break;
    }
    const Eigen::VectorXd proxy = A.matrix.transpose() * r;
    std::vector<std::size_t> omega = project({proxy.data(), t}, 2 * K);
    omega.insert(omega.end(), support.begin(), support.end());
    std::sort(omega.begin(), omega.end());
    omega.erase(std::unique(omega.begin(), omega.end()), omega.end());

    Eigen::MatrixXd sub(A.rows, static_cast<Eigen::Index>(omega.size()));
    for (std::size_t j = 0; j < omega.size(); ++j) sub.col(Eigen::Index(j)) = A.matrix.col(Eigen::Index(omega[j]));
    const Fit fit = least_squares(sub, b);
    regularized = regularized || fit.regularized;

    std::vector<double> wide(t, 0.0);
    for (std::size_t j = 0; j < omega.size(); ++j) wide[omega[j]] = fit.z(Eigen::Index(j));
    support = project(wide, 2 * K);
    y = restrict_to(wide, support);

    r = b - A.apply(y);
    const double norm = r.norm();
    if (it == 1) best.first_residual_norm = norm;
    best.iterations = it;
    if (norm < best.residual_norm) {
      best.y = y;
      best.support = support;
      best.residual_norm = norm;
    }
    if (!(norm < previous * (1.0 - options.min_relative_decrease))) break;
    previous = norm;
  }
  best.regularized = regularized;
  return best;
}

CosampResult l1l1_tree_recover(const DenseSketch& A, const Eigen::VectorXd& b, const CoefficientTree& tree,
                               std::size_t K, const CosampOptions& options) {
  if (tree.coefficients() != A.cols) throw std::invalid_argument("tree does not match sketch columns");
  return model_cosamp(A, b, K, tree_projector(tree), options);
}

double best_tree_l1_error(const CoefficientTree& tree, std::span<const double> y, std::size_t K) {
  const auto keep = tree_project_support(tree, y, K, ProjectionScore::magnitude);
  return l1_outside(y, keep);
}

}  // namespace emdsparse
