#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "emdsparse/grid.hpp"

namespace emdsparse {

/// h(x) = ((a x + b) mod (2^61 - 1)) mod range, with a != 0.
class PairwiseHash {
 public:
  PairwiseHash() = default;
  PairwiseHash(std::uint64_t a, std::uint64_t b, std::size_t range) : a_(a), b_(b), range_(range) {}
  template <class Rng>
  static PairwiseHash draw(Rng& rng, std::size_t range);

  std::size_t operator()(std::uint64_t x) const;
  std::size_t range() const { return range_; }

 private:
  std::uint64_t a_ = 1;
  std::uint64_t b_ = 0;
  std::size_t range_ = 1;
};

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

template <class Rng>
PairwiseHash PairwiseHash::draw(Rng& rng, std::size_t range) {
  std::uint64_t a = 0;
  while (a == 0) a = rng() % kMersenne61;
  return PairwiseHash(a, rng() % kMersenne61, range);
}

struct LevelHashConfig {
  std::size_t s = 1;
  /// u = bucket_factor * s buckets per hashed level (256 = 32 * 8).
  double bucket_factor = 256.0;
  std::uint64_t seed = 0;
};

/// Binary sketch for support finding. Levels with at most 2s cells are stored
/// raw; every lower level i is hashed into u buckets by its own h_i.
/// Measurement layout: hashed levels 0, 1, ..., L*-1 (u values each), then the
/// raw cells of levels >= L* in grid order.
class LevelHashSketch {
 public:
  LevelHashSketch(int delta, const LevelHashConfig& config);

  int delta() const { return delta_; }
  std::size_t s() const { return s_; }
  std::size_t buckets() const { return u_; }
  std::uint64_t seed() const { return seed_; }
  /// L*: the lowest level stored raw.
  int explicit_level() const { return explicit_level_; }
  std::size_t rows() const;
  /// Measurement row of a cell on a hashed level: level * u + h_level(cell).
  std::size_t bucket_of(std::size_t cell) const;

  std::vector<double> apply(const PyramidCoeffs& y) const;

 private:
  int delta_;
  std::size_t s_;
  std::size_t u_;
  std::uint64_t seed_;
  int explicit_level_;
  std::vector<PairwiseHash> hash_;
};

struct LevelDiagnostic {
  int level = 0;
  double skipped_max = 0.0;  // w_i
  double missed_mass = 0.0;  // f_i = |y over G_(i+1) minus T_(i+1)|_1
  double sth_largest = 0.0;  // c_i
  bool holds = true;         // w_i <= max(f_i / (4 s), 2 c_i)
};

struct FindSupportResult {
  TreeSupport support;
  /// T_i for every hashed level, indexed by level.
  std::vector<std::vector<std::size_t>> kept;
};

/// Top-down support search: all cells of level L*, then at each lower level the
/// 2s children of the kept cells with the largest bucket estimates (ties to the
/// lower cell index). The support also contains every raw level.
FindSupportResult find_support(const LevelHashSketch& sketch, std::span<const double> measurements);

/// Per-level quantities of the skipped-value bound, evaluated against the true y.
std::vector<LevelDiagnostic> find_support_diagnostics(const LevelHashSketch& sketch,
                                                      const FindSupportResult& result, const PyramidCoeffs& y);

struct SetQueryConfig {
  std::size_t max_support = 1;
  std::size_t buckets_per_element = 8;
  std::size_t repetitions = 3;
  std::uint64_t seed = 0;
  /// Rounds of re-estimation that subtract the other support elements'
  /// current estimates from shared buckets.
  int peel_rounds = 2;
};

/// Sign-hash sketch over coordinates [0, domain): per repetition one bucket
/// hash and one sign hash.
class SetQuerySketch {
 public:
  SetQuerySketch(std::size_t domain, const SetQueryConfig& config);

  std::size_t domain() const { return domain_; }
  std::size_t buckets() const { return buckets_; }
  std::size_t repetitions() const { return hash_.size(); }
  const SetQueryConfig& config() const { return config_; }
  std::size_t rows() const { return buckets_ * hash_.size(); }

  std::size_t bucket(std::size_t rep, std::size_t coordinate) const { return hash_[rep](coordinate); }
  double sign(std::size_t rep, std::size_t coordinate) const { return sign_[rep](coordinate) ? 1.0 : -1.0; }

  std::vector<double> apply(std::span<const double> v) const;

 private:
  std::size_t domain_;
  std::size_t buckets_;
  SetQueryConfig config_;
  std::vector<PairwiseHash> hash_;
  std::vector<PairwiseHash> sign_;
};

/// Median-of-repetitions estimates of v on `support` (same order). Throws
/// std::invalid_argument when |support| exceeds max_support.
std::vector<double> set_query(const SetQuerySketch& sketch, std::span<const double> measurements,
                              std::span<const std::size_t> support);

struct RandomizedConfig {
  std::size_t s = 1;
  double bucket_factor = 256.0;
  std::size_t buckets_per_element = 8;
  std::size_t repetitions = 3;
  int peel_rounds = 2;
  std::uint64_t seed = 0;
};

/// Both sketches of the randomized scheme on one delta. The set-query domain
/// is the tail of the coefficient vector holding the hashed levels.
class RandomizedSketch {
 public:
  RandomizedSketch(int delta, const RandomizedConfig& config);

  const LevelHashSketch& support_sketch() const { return support_; }
  const SetQuerySketch& value_sketch() const { return values_; }
  const RandomizedConfig& config() const { return config_; }
  int delta() const { return support_.delta(); }
  /// First coefficient index covered by the set-query sketch.
  std::size_t hashed_offset() const { return offset_; }
  std::size_t rows() const { return support_.rows() + values_.rows(); }

  std::vector<double> apply(const PyramidCoeffs& y) const;

 private:
  RandomizedConfig config_;
  LevelHashSketch support_;
  std::size_t offset_;
  SetQuerySketch values_;
};

struct RandomizedResult {
  PyramidCoeffs y;
  FindSupportResult support;
};

/// find_support followed by set_query on the hashed part of the support;
/// raw levels are copied from the measurements.
RandomizedResult randomized_l1l1_recover(const RandomizedSketch& sketch, std::span<const double> measurements);

/// Upper bound on min over y' in the value-tree model (width s) of |y - y'|_1:
/// the greedy projection error, or |y - reference|_1 when a model member is
/// supplied, whichever is smaller.
double model_m_benchmark(const PyramidCoeffs& y, std::size_t s, const PyramidCoeffs* reference = nullptr);

struct ModelMSample {
  PyramidCoeffs clean;
  PyramidCoeffs noisy;
};

/// A random member of the value-tree model with width s (root value
/// 2^l * mass), plus nonnegative noise of total `noise_fraction * |clean|_1`
/// spread over `noise_cells` random cells.
ModelMSample sample_model_m(int delta, std::size_t s, double mass, double noise_fraction,
                            std::size_t noise_cells, std::uint64_t seed);

}  // namespace emdsparse
