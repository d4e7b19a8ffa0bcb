#include "emdsparse/randrec.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "emdsparse/tree.hpp"

namespace emdsparse {

std::size_t PairwiseHash::operator()(std::uint64_t x) const {
  const unsigned __int128 v = static_cast<unsigned __int128>(a_) * (x % kMersenne61) + b_;
  std::uint64_t r = static_cast<std::uint64_t>((v & kMersenne61) + (v >> 61));
  r = (r & kMersenne61) + (r >> 61);
  if (r >= kMersenne61) r -= kMersenne61;
  return static_cast<std::size_t>(r % range_);
}

LevelHashSketch::LevelHashSketch(int delta, const LevelHashConfig& config)
    : delta_(delta), s_(config.s), seed_(config.seed) {
  const Grid grid(delta);
  if (config.s == 0) throw std::invalid_argument("width s must be positive");
  if (!(config.bucket_factor > 0.0)) throw std::invalid_argument("bucket factor must be positive");
  u_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(config.bucket_factor * double(config.s))));
  explicit_level_ = 0;
  while (grid.level_size(explicit_level_) > 2 * s_) ++explicit_level_;
  std::mt19937_64 rng(seed_);
  for (int i = 0; i < explicit_level_; ++i) hash_.push_back(PairwiseHash::draw(rng, u_));
}

std::size_t LevelHashSketch::rows() const {
  const Grid grid(delta_);
  return static_cast<std::size_t>(explicit_level_) * u_ + grid.level_offset(explicit_level_) +
         grid.level_size(explicit_level_);
}

std::size_t LevelHashSketch::bucket_of(std::size_t cell) const {
  const Grid grid(delta_);
  const int level = grid.level_of(cell);
  if (level >= explicit_level_) throw std::invalid_argument("cell lies on a raw level");
  return static_cast<std::size_t>(level) * u_ + hash_[level](cell - grid.level_offset(level));
}

std::vector<double> LevelHashSketch::apply(const PyramidCoeffs& y) const {
  const Grid grid(delta_);
  if (y.delta != delta_ || y.values.size() != grid.cells())
    throw std::invalid_argument("coefficients do not match sketch");
  std::vector<double> out(rows(), 0.0);
  const std::size_t hashed_rows = static_cast<std::size_t>(explicit_level_) * u_;
  const std::size_t raw = grid.level_offset(explicit_level_) + grid.level_size(explicit_level_);
  for (std::size_t q = 0; q < raw; ++q) out[hashed_rows + q] = y.values[q];
  for (int level = 0; level < explicit_level_; ++level) {
    const std::size_t off = grid.level_offset(level);
    for (std::size_t j = 0; j < grid.level_size(level); ++j)
      if (y.values[off + j] != 0.0) out[level * u_ + hash_[level](j)] += y.values[off + j];
  }
  return out;
}

namespace {

// The `count` largest entries by score, ties to the lower index; sorted by index.
std::vector<std::size_t> top_by(std::vector<std::size_t> cand, std::size_t count,
                                const std::vector<double>& score) {
  if (cand.size() > count) {
    auto better = [&](std::size_t a, std::size_t b) { return score[a] != score[b] ? score[a] > score[b] : a < b; };
    std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(count), cand.end(), better);
    cand.resize(count);
  }
  std::sort(cand.begin(), cand.end());
  return cand;
}

std::vector<std::size_t> children_of(const Grid& grid, const std::vector<std::size_t>& cells) {
  std::vector<std::size_t> out;
  out.reserve(cells.size() * 4);
  for (std::size_t q : cells)
    for (std::size_t r : grid.children(q)) out.push_back(r);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> level_cells(const Grid& grid, int level) {
  std::vector<std::size_t> out(grid.level_size(level));
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = grid.level_offset(level) + j;
  return out;
}

}  // namespace

FindSupportResult find_support(const LevelHashSketch& sketch, std::span<const double> measurements) {
  if (measurements.size() != sketch.rows()) throw std::invalid_argument("measurement length mismatch");
  const Grid grid(sketch.delta());
  const int top = sketch.explicit_level();
  FindSupportResult result;
  result.kept.resize(static_cast<std::size_t>(top));
  const std::size_t raw = grid.level_offset(top) + grid.level_size(top);
  std::vector<std::size_t> cells(raw);
  for (std::size_t q = 0; q < raw; ++q) cells[q] = q;

  std::vector<double> estimate(grid.cells(), 0.0);
  std::vector<std::size_t> previous = level_cells(grid, top);
  for (int level = top - 1; level >= 0; --level) {
    std::vector<std::size_t> cand = children_of(grid, previous);
    for (std::size_t q : cand) estimate[q] = measurements[sketch.bucket_of(q)];
    previous = top_by(std::move(cand), 2 * sketch.s(), estimate);
    cells.insert(cells.end(), previous.begin(), previous.end());
    result.kept[static_cast<std::size_t>(level)] = previous;
  }
  std::sort(cells.begin(), cells.end());
  result.support.cells = std::move(cells);
  result.support.width_bound = 2 * sketch.s();
  return result;
}

std::vector<LevelDiagnostic> find_support_diagnostics(const LevelHashSketch& sketch,
                                                      const FindSupportResult& result, const PyramidCoeffs& y) {
  const Grid grid(sketch.delta());
  const int top = sketch.explicit_level();
  std::vector<LevelDiagnostic> out;
  for (int level = top - 1; level >= 0; --level) {
    const std::vector<std::size_t> parents =
        level + 1 == top ? level_cells(grid, top) : result.kept[static_cast<std::size_t>(level + 1)];
    const std::vector<std::size_t>& kept = result.kept[static_cast<std::size_t>(level)];
    LevelDiagnostic d;
    d.level = level;
    for (std::size_t q : children_of(grid, parents))
      if (!std::binary_search(kept.begin(), kept.end(), q)) d.skipped_max = std::max(d.skipped_max, y.values[q]);
    if (level + 1 < top) {
      const std::size_t off = grid.level_offset(level + 1);
      for (std::size_t j = 0; j < grid.level_size(level + 1); ++j)
        if (!std::binary_search(parents.begin(), parents.end(), off + j)) d.missed_mass += std::abs(y.values[off + j]);
    }
    std::vector<double> vals;
    for (std::size_t q : kept) vals.push_back(y.values[q]);
    std::sort(vals.begin(), vals.end(), std::greater<>());
    if (vals.size() >= sketch.s()) d.sth_largest = vals[sketch.s() - 1];
    const double bound = std::max(d.missed_mass / (4.0 * double(sketch.s())), 2.0 * d.sth_largest);
    d.holds = d.skipped_max <= bound * (1 + 1e-12) + 1e-12;
    out.push_back(d);
  }
  return out;
}

SetQuerySketch::SetQuerySketch(std::size_t domain, const SetQueryConfig& config)
    : domain_(domain), buckets_(config.buckets_per_element * config.max_support), config_(config) {
  if (buckets_ == 0) return;
  std::mt19937_64 rng(config.seed);
  for (std::size_t r = 0; r < config.repetitions; ++r) {
    hash_.push_back(PairwiseHash::draw(rng, buckets_));
    sign_.push_back(PairwiseHash::draw(rng, 2));
  }
}

std::vector<double> SetQuerySketch::apply(std::span<const double> v) const {
  if (v.size() != domain_) throw std::invalid_argument("vector length does not match set-query domain");
  std::vector<double> out(rows(), 0.0);
  for (std::size_t c = 0; c < v.size(); ++c) {
    if (v[c] == 0.0) continue;
    for (std::size_t r = 0; r < hash_.size(); ++r) out[r * buckets_ + bucket(r, c)] += sign(r, c) * v[c];
  }
  return out;
}

namespace {

double median(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> set_query(const SetQuerySketch& sketch, std::span<const double> measurements,
                              std::span<const std::size_t> support) {
  if (support.size() > sketch.config().max_support) throw std::invalid_argument("support exceeds set-query capacity");
  if (measurements.size() != sketch.rows()) throw std::invalid_argument("measurement length mismatch");
  for (std::size_t c : support)
    if (c >= sketch.domain()) throw std::invalid_argument("support index outside set-query domain");
  const std::size_t reps = sketch.repetitions(), nb = sketch.buckets();
  std::vector<double> est(support.size(), 0.0);
  if (reps == 0) return est;
  std::vector<double> votes(reps);
  for (std::size_t i = 0; i < support.size(); ++i) {
    for (std::size_t r = 0; r < reps; ++r)
      votes[r] = sketch.sign(r, support[i]) * measurements[r * nb + sketch.bucket(r, support[i])];
    est[i] = median(votes);
  }
  for (int round = 0; round < sketch.config().peel_rounds; ++round) {
    std::vector<double> residual(measurements.begin(), measurements.end());
    for (std::size_t i = 0; i < support.size(); ++i)
      for (std::size_t r = 0; r < reps; ++r)
        residual[r * nb + sketch.bucket(r, support[i])] -= sketch.sign(r, support[i]) * est[i];
    std::vector<double> next(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
      for (std::size_t r = 0; r < reps; ++r)
        votes[r] = est[i] + sketch.sign(r, support[i]) * residual[r * nb + sketch.bucket(r, support[i])];
      next[i] = median(votes);
    }
    est.swap(next);
  }
  return est;
}

namespace {

constexpr std::uint64_t kValueSeedSalt = 0x9E3779B97F4A7C15ULL;

std::size_t hashed_offset_for(const LevelHashSketch& s) {
  const Grid grid(s.delta());
  return grid.level_offset(s.explicit_level()) + grid.level_size(s.explicit_level());
}

}  // namespace

RandomizedSketch::RandomizedSketch(int delta, const RandomizedConfig& config)
    : config_(config),
      support_(delta, LevelHashConfig{config.s, config.bucket_factor, config.seed}),
      offset_(hashed_offset_for(support_)),
      values_(Grid(delta).cells() - offset_,
              SetQueryConfig{2 * config.s * static_cast<std::size_t>(support_.explicit_level()),
                             config.buckets_per_element, config.repetitions, config.seed ^ kValueSeedSalt,
                             config.peel_rounds}) {}

std::vector<double> RandomizedSketch::apply(const PyramidCoeffs& y) const {
  std::vector<double> out = support_.apply(y);
  const std::vector<double> tail = values_.apply(std::span<const double>(y.values).subspan(offset_));
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

RandomizedResult randomized_l1l1_recover(const RandomizedSketch& sketch, std::span<const double> measurements) {
  if (measurements.size() != sketch.rows()) throw std::invalid_argument("measurement length mismatch");
  const Grid grid(sketch.delta());
  const auto& level = sketch.support_sketch();
  const auto head = measurements.first(level.rows());
  const auto tail = measurements.subspan(level.rows());
  RandomizedResult result;
  result.support = find_support(level, head);
  result.y = PyramidCoeffs{sketch.delta(), std::vector<double>(grid.cells(), 0.0)};
  const std::size_t hashed_rows = static_cast<std::size_t>(level.explicit_level()) * level.buckets();
  std::vector<std::size_t> query;
  for (std::size_t q : result.support.support.cells) {
    if (q < sketch.hashed_offset())
      result.y.values[q] = head[hashed_rows + q];
    else
      query.push_back(q - sketch.hashed_offset());
  }
  const std::vector<double> est = set_query(sketch.value_sketch(), tail, query);
  for (std::size_t i = 0; i < query.size(); ++i) result.y.values[query[i] + sketch.hashed_offset()] = est[i];
  return result;
}

double model_m_benchmark(const PyramidCoeffs& y, std::size_t s, const PyramidCoeffs* reference) {
  double best = l1_distance(y.values, project_value_tree(y, s).values);
  if (reference) best = std::min(best, l1_distance(y.values, reference->values));
  return best;
}

ModelMSample sample_model_m(int delta, std::size_t s, double mass, double noise_fraction,
                            std::size_t noise_cells, std::uint64_t seed) {
  const Grid grid(delta);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ModelMSample out;
  out.clean = PyramidCoeffs{delta, std::vector<double>(grid.cells(), 0.0)};
  auto& y = out.clean.values;
  y[0] = std::ldexp(mass, grid.levels());
  std::vector<std::size_t> kept{0};
  for (int level = grid.levels() - 1; level >= 0 && s > 0; --level) {
    std::vector<std::size_t> cand = children_of(grid, kept);
    std::shuffle(cand.begin(), cand.end(), rng);
    cand.resize(std::min(cand.size(), s));
    std::sort(cand.begin(), cand.end());
    std::vector<double> weight(grid.cells(), 0.0);
    for (std::size_t r : cand) weight[r] = 0.1 + 0.9 * unit(rng);
    for (std::size_t q : kept) {
      double total = 0.0;
      for (std::size_t r : grid.children(q)) total += weight[r];
      if (total == 0.0) continue;
      const double share = (0.6 + 0.4 * unit(rng)) * 0.5 * y[q];
      for (std::size_t r : grid.children(q)) y[r] = share * weight[r] / total;
    }
    kept = std::move(cand);
  }
  out.noisy = out.clean;
  const double budget = noise_fraction * l1_norm(y);
  if (noise_cells > 0 && budget > 0.0) {
    std::uniform_int_distribution<std::size_t> pick(0, grid.cells() - 1);
    std::vector<std::pair<std::size_t, double>> noise;
    double total = 0.0;
    for (std::size_t i = 0; i < noise_cells; ++i) {
      const double w = unit(rng);
      noise.push_back({pick(rng), w});
      total += w;
    }
    for (const auto& [q, w] : noise) out.noisy.values[q] += budget * w / total;
  }
  return out;
}

}  // namespace emdsparse
