#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "emdsparse/grid.hpp"
#include "emdsparse/kmedian.hpp"

namespace emdsparse {

/// Raised when an input violates an algorithm's documented precondition
/// (e.g. a negative surplus handed to invert_nonneg_surpluses).
class PreconditionViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Sparse coefficient vector: (cell index, value) pairs.
using SparseCoeffs = std::vector<std::pair<std::size_t, double>>;

/// Coefficient of cell q at level i is 2^i times the mass of x inside q.
PyramidCoeffs pyramid_transform(const GridImage& x);

/// Per-cell surplus s_q = b_q / 2^i - sum over children b_r / 2^(i-1); s_q = b_q at leaves.
std::vector<double> surpluses(const PyramidCoeffs& b);

/// Places each cell's surplus on the cell's center pixel. With all surpluses
/// nonnegative the result minimizes |b - P y|_1 exactly. Surpluses below
/// -tolerance * (scale of b) throw PreconditionViolation; smaller negatives are
/// treated as rounding and clamped to zero.
GridImage invert_nonneg_surpluses(const PyramidCoeffs& b, double tolerance = 1e-9);

/// Preorder repair of negative surpluses: at a node with s_q < 0 the children
/// are reduced by 2^(i-1) |s_q| in total, in NW, NE, SW, SE order, each child
/// zeroed before the next is touched. Guarantees
/// |b - b'|_1 <= 3 min_y |P y - b|_1. Requires b >= 0 (std::invalid_argument).
PyramidCoeffs make_nonneg_surpluses(const PyramidCoeffs& b);

struct InversionStats {
  /// Nodes popped by the surplus-repair descent.
  std::size_t node_visits = 0;
  /// Child lookups made by the descent.
  std::size_t child_probes = 0;
};

/// Sparse form of make_nonneg_surpluses. The descent stops at cells whose
/// repaired value is zero, so work is O(|supp(b)|). The result lists the
/// nonzero cells of b' in preorder; b' is zero everywhere else.
SparseCoeffs make_nonneg_surpluses(int delta, const SparseCoeffs& b, InversionStats* stats = nullptr);

/// Sparse form of invert_nonneg_surpluses: returns (pixel, mass) point masses.
std::vector<std::pair<std::size_t, double>> invert_nonneg_surpluses(int delta, const SparseCoeffs& b,
                                                                    double tolerance = 1e-9);

/// Surplus repair followed by exact inversion. For every x >= 0,
/// |P y - P x|_1 <= 8 |b - P x|_1. Requires b >= 0.
GridImage pyramid_invert(const PyramidCoeffs& b, InversionStats* stats = nullptr);
GridImage pyramid_invert(int delta, const SparseCoeffs& b, InversionStats* stats = nullptr);

SparseCoeffs to_sparse(const PyramidCoeffs& b);

struct AlignmentOptions {
  /// Same-level cells admitted per k-median center; defaults to
  /// default_width_per_center(eps).
  std::optional<std::size_t> width_per_center;
  KMedianOptions median;
};

struct AlignmentCertificate {
  TreeSupport support;
  KMedianResult median;         // the k-sparse x' the certificate is built around
  double median_emd = 0.0;      // |x - x'|_EMD (the k-median cost)
  double residual_l1 = 0.0;     // |(P x) restricted to the complement of S|_1
  std::size_t width = 0;        // max cells of S on one level
  std::size_t width_bound = 0;  // k * width_per_center, capped by level size
  std::size_t size = 0;         // |S|
  std::size_t size_bound = 0;   // sum over levels of min(|G_i|, k * width_per_center)
  double size_constant = 0.0;   // |S| / ((k / eps^2) log2(n / k))
};

/// Upper bound on the number of same-level cells whose nearest pixel lies
/// within (2 / eps) 2^i of a fixed pixel: #{(a, b) : (|a|-1)+ + (|b|-1)+ <= 2/eps}.
std::size_t default_width_per_center(double eps);

/// Builds the tree S around a k-median solution x' of x: for every center and
/// level i, every level-i cell within l1 distance (2 / eps) 2^i of the center,
/// closed under parents. Then |(P x)_{not S}|_1 <= eps |x - x'|_EMD.
/// Requires x >= 0, 1 <= k <= n / 2 and eps in (0, 1].
AlignmentCertificate alignment_certificate(const GridImage& x, int k, double eps,
                                           const AlignmentOptions& options = {});

}  // namespace emdsparse
