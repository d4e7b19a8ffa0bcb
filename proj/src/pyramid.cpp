#include "emdsparse/pyramid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace emdsparse {

PyramidCoeffs pyramid_transform(const GridImage& x) {
  const Grid grid(x.delta());
  PyramidCoeffs b{x.delta(), std::vector<double>(grid.cells(), 0.0)};
  // Level 0 first, then aggregate masses upward.
  const std::size_t leaf = grid.level_offset(0);
  for (std::size_t p = 0; p < x.size(); ++p) b.values[leaf + p] = x[p];
  for (int level = 1; level <= grid.levels(); ++level) {
    const std::size_t off = grid.level_offset(level);
    for (std::size_t j = 0; j < grid.level_size(level); ++j) {
      double mass = 0.0;
      for (std::size_t c : grid.children(off + j)) mass += b.values[c] / double(1 << (level - 1));
      b.values[off + j] = mass * double(1 << level);
    }
  }
  return b;
}

std::vector<double> surpluses(const PyramidCoeffs& b) {
  const Grid grid(b.delta);
  if (b.values.size() != grid.cells()) throw std::invalid_argument("coefficient length does not match delta");
  std::vector<double> s(b.values.size());
  for (std::size_t q = 0; q < s.size(); ++q) {
    const int level = grid.level_of(q);
    s[q] = b.values[q] / double(1 << level);
    if (level == 0) continue;
    for (std::size_t r : grid.children(q)) s[q] -= b.values[r] / double(1 << (level - 1));
  }
  return s;
}

namespace {

void check_length(const PyramidCoeffs& b, const Grid& grid) {
  if (b.values.size() != grid.cells()) throw std::invalid_argument("coefficient length does not match delta");
}

void check_nonnegative(const PyramidCoeffs& b) {
  for (double v : b.values)
    if (v < 0.0 || std::isnan(v)) throw std::invalid_argument("coefficients must be nonnegative");
}

double mass_scale(const Grid& grid, const std::vector<double>& values) {
  double scale = 0.0;
  for (std::size_t q = 0; q < values.size(); ++q)
    scale = std::max(scale, std::abs(values[q]) / double(1 << grid.level_of(q)));
  return scale;
}

double accept_surplus(double s, double floor) {
  if (s < -floor)
    throw PreconditionViolation("negative surplus " + std::to_string(s) + " in invert_nonneg_surpluses");
  return std::max(s, 0.0);
}

}  // namespace

GridImage invert_nonneg_surpluses(const PyramidCoeffs& b, double tolerance) {
  const Grid grid(b.delta);
  check_length(b, grid);
  const std::vector<double> s = surpluses(b);
  const double floor = tolerance * mass_scale(grid, b.values);
  GridImage y(b.delta);
  for (std::size_t q = 0; q < s.size(); ++q) {
    const double v = accept_surplus(s[q], floor);
    if (v > 0.0) y[grid.center_pixel(q)] += v;
  }
  return y;
}

PyramidCoeffs make_nonneg_surpluses(const PyramidCoeffs& b) {
  const Grid grid(b.delta);
  check_length(b, grid);
  check_nonnegative(b);
  PyramidCoeffs out = b;
  auto& v = out.values;
  // Parents precede children in the enumeration, so one pass is a valid preorder.
  for (std::size_t q = 0; q < grid.level_offset(0); ++q) {
    const auto kids = grid.children(q);
    double sum = 0.0;
    for (std::size_t r : kids) sum += v[r];
    double excess = sum - 0.5 * v[q];
    if (excess <= 0.0) continue;
    for (std::size_t r : kids) {
      const double cut = std::min(v[r], excess);
      v[r] -= cut;
      excess -= cut;
      if (excess <= 0.0) break;
    }
  }
  return out;
}

SparseCoeffs make_nonneg_surpluses(int delta, const SparseCoeffs& b, InversionStats* stats) {
  const Grid grid(delta);
  std::unordered_map<std::size_t, double> value;
  value.reserve(b.size() * 2);
  for (const auto& [q, v] : b) {
    if (q >= grid.cells()) throw std::invalid_argument("cell index out of range");
    if (v < 0.0 || std::isnan(v)) throw std::invalid_argument("coefficients must be nonnegative");
    if (v > 0.0) value[q] += v;
  }
  InversionStats local;
  SparseCoeffs out;
  std::vector<std::pair<std::size_t, double>> stack;
  if (auto it = value.find(0); it != value.end()) stack.push_back(*it);
  while (!stack.empty()) {
    const auto [q, v] = stack.back();
    stack.pop_back();
    ++local.node_visits;
    out.push_back({q, v});
    if (grid.level_of(q) == 0) continue;
    const auto kids = grid.children(q);
    std::array<double, 4> cv{};
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      ++local.child_probes;
      auto it = value.find(kids[j]);
      cv[j] = it == value.end() ? 0.0 : it->second;
      sum += cv[j];
    }
    double excess = sum - 0.5 * v;
    for (int j = 0; j < 4 && excess > 0.0; ++j) {
      const double cut = std::min(cv[j], excess);
      cv[j] -= cut;
      excess -= cut;
    }
    for (int j = 3; j >= 0; --j)
      if (cv[j] > 0.0) stack.push_back({kids[j], cv[j]});
  }
  if (stats) {
    stats->node_visits += local.node_visits;
    stats->child_probes += local.child_probes;
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> invert_nonneg_surpluses(int delta, const SparseCoeffs& b,
                                                                    double tolerance) {
  const Grid grid(delta);
  std::unordered_map<std::size_t, double> value;
  value.reserve(b.size() * 2);
  double scale = 0.0;
  for (const auto& [q, v] : b) {
    if (q >= grid.cells()) throw std::invalid_argument("cell index out of range");
    value[q] += v;
  }
  for (const auto& [q, v] : value) scale = std::max(scale, std::abs(v) / double(1 << grid.level_of(q)));
  const double floor = tolerance * scale;
  std::map<std::size_t, double> pixels;
  for (const auto& [q, v] : value) {
    const int level = grid.level_of(q);
    double s = v / double(1 << level);
    if (level > 0)
      for (std::size_t r : grid.children(q))
        if (auto it = value.find(r); it != value.end()) s -= it->second / double(1 << (level - 1));
    s = accept_surplus(s, floor);
    if (s > 0.0) pixels[grid.center_pixel(q)] += s;
  }
  // Cells that are absent but have stored children carry negative surplus.
  for (const auto& [q, v] : value) {
    const std::size_t p = grid.parent(q);
    if (p != Grid::npos && !value.contains(p)) {
      const int level = grid.level_of(p);
      double s = 0.0;
      for (std::size_t r : grid.children(p))
        if (auto it = value.find(r); it != value.end()) s -= it->second / double(1 << (level - 1));
      accept_surplus(s, floor);
    }
  }
  return {pixels.begin(), pixels.end()};
}

GridImage pyramid_invert(int delta, const SparseCoeffs& b, InversionStats* stats) {
  const SparseCoeffs repaired = make_nonneg_surpluses(delta, b, stats);
  // The repair zeroes surpluses only up to rounding; absorb that slack here.
  const auto masses = invert_nonneg_surpluses(delta, repaired, 1e-9);
  GridImage y(delta);
  for (const auto& [p, m] : masses) y[p] += m;
  return y;
}

GridImage pyramid_invert(const PyramidCoeffs& b, InversionStats* stats) {
  const Grid grid(b.delta);
  check_length(b, grid);
  check_nonnegative(b);
  return pyramid_invert(b.delta, to_sparse(b), stats);
}

SparseCoeffs to_sparse(const PyramidCoeffs& b) {
  SparseCoeffs out;
  for (std::size_t q = 0; q < b.values.size(); ++q)
    if (b.values[q] != 0.0) out.push_back({q, b.values[q]});
  return out;
}

std::size_t default_width_per_center(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double radius = 2.0 / eps;
  const long reach = static_cast<long>(std::floor(radius)) + 1;
  std::size_t count = 0;
  for (long a = -reach; a <= reach; ++a)
    for (long c = -reach; c <= reach; ++c) {
      const double d = std::max(0L, std::abs(a) - 1) + std::max(0L, std::abs(c) - 1);
      if (d <= radius) ++count;
    }
  return count;
}

namespace {

// l1 distance along one axis from pixel coordinate p to the span [lo, lo + len).
long axis_gap(long p, long lo, long len) {
  if (p < lo) return lo - p;
  if (p >= lo + len) return p - (lo + len - 1);
  return 0;
}

}  // namespace

AlignmentCertificate alignment_certificate(const GridImage& x, int k, double eps,
                                           const AlignmentOptions& options) {
  const int delta = x.delta();
  const Grid grid(delta);
  if (!x.nonnegative()) throw std::invalid_argument("alignment certificate requires x >= 0");
  if (k < 1 || static_cast<std::size_t>(k) > grid.pixels() / 2)
    throw std::invalid_argument("k must lie in [1, n/2]");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");

  AlignmentCertificate cert;
  cert.median = weighted_k_median(x, k, options.median);
  cert.median_emd = cert.median.cost;

  const std::size_t per_center = options.width_per_center.value_or(default_width_per_center(eps));
  const double radius = 2.0 / eps;
  const long reach = static_cast<long>(std::floor(radius)) + 1;

  std::vector<std::size_t> cells;
  for (std::size_t center : cert.median.centers) {
    const long r = static_cast<long>(center / delta), c = static_cast<long>(center % delta);
    for (int level = 0; level <= grid.levels(); ++level) {
      const long len = 1L << level, side = grid.side(level);
      const long cr = r >> level, cc = c >> level;
      const double limit = radius * double(len);
      for (long a = std::max(0L, cr - reach); a <= std::min(side - 1, cr + reach); ++a)
        for (long bcol = std::max(0L, cc - reach); bcol <= std::min(side - 1, cc + reach); ++bcol) {
          const long d = axis_gap(r, a * len, len) + axis_gap(c, bcol * len, len);
          if (double(d) <= limit) cells.push_back(grid.index({level, int(a), int(bcol)}));
        }
    }
  }
  cert.support = close_under_parent(grid, cells);

  std::size_t size_bound = 0;
  const std::size_t per_level = static_cast<std::size_t>(k) * per_center;
  for (int level = 0; level <= grid.levels(); ++level)
    size_bound += std::min(grid.level_size(level), per_level);
  cert.width_bound = std::min(grid.pixels(), per_level);
  cert.support.width_bound = cert.width_bound;
  cert.size_bound = size_bound;
  cert.width = max_width(grid, cert.support);
  cert.size = cert.support.cells.size();

  const PyramidCoeffs px = pyramid_transform(x);
  cert.residual_l1 = l1_outside(px.values, cert.support.cells);
  const double n = double(grid.pixels());
  const double denom = (double(k) / (eps * eps)) * std::log2(n / double(k));
  cert.size_constant = denom > 0.0 ? double(cert.size) / denom : 0.0;
  return cert;
}

}  // namespace emdsparse
