#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "emdsparse/cosamp.hpp"
#include "emdsparse/grid.hpp"
#include "emdsparse/kmedian.hpp"

namespace emdsparse {

enum class Scheme { pyramid_dense, pyramid_tree_cosamp, pyramid_randomized, haar_tree_cosamp };

Scheme parse_scheme(std::string_view name);
std::string_view scheme_name(Scheme scheme);
std::vector<Scheme> all_schemes();

struct SchemeConfig {
  Scheme scheme = Scheme::pyramid_tree_cosamp;
  int delta = 32;
  int k = 4;
  double eps = 1.0;
  std::uint64_t seed = 0;

  /// Tree schemes: m = ceil(c_rows * K).
  double c_rows = 8.0;
  /// pyramid_dense: m = ceil(c_dense * K * log2(t / K)).
  double c_dense = 2.0;
  /// pyramid_randomized: width s = ceil(c_w * k / eps^2).
  double c_w = 9.0;
  double bucket_factor = 256.0;
  std::size_t c_sq = 8;
  std::size_t repetitions = 3;
  int peel_rounds = 2;

  CosampOptions cosamp;
  KMedianOptions median;
};

/// Throws std::invalid_argument for a bad delta, k outside [1, n/2], eps
/// outside (0, 1] or nonpositive constants.
void validate(const SchemeConfig& config);

struct SchemeDims {
  std::size_t coefficients = 0;  // t for the pyramid, n for Haar
  std::size_t tree_budget = 0;   // ceil(claim_tree_size_bound / eps^2), capped at t
  std::size_t budget = 0;        // the inner model budget handed to CoSaMP
  std::size_t width = 0;         // randomized width s
  std::size_t rows = 0;
};

SchemeDims scheme_dims(const SchemeConfig& config);

/// Row bounds of the form c * k * log2 n * log2(n/k) (dense) or
/// c * (k / eps^2) * log2(n/k) (the rest), with c derived from the configured
/// constants. scheme_dims(config).rows never exceeds this value.
double row_bound(const SchemeConfig& config);
/// The leading constant of row_bound with the k-dependent factors divided out.
double row_constant(const SchemeConfig& config);

/// Measurements of x. The randomized scheme never forms a dense matrix.
std::vector<double> sketch(const SchemeConfig& config, const GridImage& x);

struct Recovery {
  /// Embedding-domain estimate y* (clamped at zero for pyramid schemes).
  std::vector<double> y;
  /// B^-1(y*); signed for the Haar scheme.
  GridImage x;
  std::size_t support_size = 0;
  int iterations = 0;
  bool regularized = false;
};

Recovery recover(const SchemeConfig& config, const std::vector<double>& measurements);

struct Sparsified {
  GridImage image;
  KMedianResult clustering;
};

/// Weighted k-median of the (nonnegative) image; each cluster's mass moves to
/// its center. Images with at most k nonzeros are returned unchanged.
Sparsified strict_sparsify(const GridImage& x, int k, const KMedianOptions& options = {});

struct RecoveryReport {
  std::string scheme;
  int delta = 0;
  int k = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::size_t rows_used = 0;
  double emd_error = 0.0;        // |x - x_hat|_EMD after strict sparsification
  double emd_error_raw = 0.0;    // |x - x*|_EMD
  double best_k_sparse_emd = 0.0;
  double ratio = 0.0;            // emd_error / best_k_sparse_emd, 0 when exact
  bool exact = false;            // best_k_sparse_emd == 0
  double inner_l1 = 0.0;         // |y* - B x|_1
  double inner_l1_inverted = 0.0;  // |y* - B x*|_1
  double embed_l1 = 0.0;         // |B (x - x*)|_1
  bool chain_ok = false;         // emd_error_raw <= embed_l1 <= inner_l1 + inner_l1_inverted
  double c_measured = 0.0;       // |x* - x|_EMD / |x' - x|_EMD
  double c_prime = 0.0;          // |x_hat - x*|_EMD / min(k-median cost of x*, |x' - x*|_EMD)
  bool claim_ok = false;         // |x_hat - x| <= (C' + 1) |x* - x| + C' |x' - x|
  double wall_ms = 0.0;
  bool success = false;
};

/// sketch -> recover -> strict_sparsify -> exact evaluation.
RecoveryReport run_trial(const SchemeConfig& config, const GridImage& x);

/// Sketch file: "EMDSKT v1" header, one "key value" line per config field,
/// then the measurement count and values.
void write_sketch(std::ostream& out, const SchemeConfig& config, const std::vector<double>& measurements);
std::pair<SchemeConfig, std::vector<double>> read_sketch(std::istream& in);

}  // namespace emdsparse
