#include "emdsparse/haar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emdsparse {

namespace {

// Cell masses for every cell in Grid enumeration order.
std::vector<double> cell_masses(const Grid& grid, const GridImage& x) {
  std::vector<double> m(grid.cells(), 0.0);
  const std::size_t leaf = grid.level_offset(0);
  for (std::size_t p = 0; p < x.size(); ++p) m[leaf + p] = x[p];
  for (int level = 1; level <= grid.levels(); ++level) {
    const std::size_t off = grid.level_offset(level);
    for (std::size_t j = 0; j < grid.level_size(level); ++j) {
      double s = 0.0;
      for (std::size_t c : grid.children(off + j)) s += m[c];
      m[off + j] = s;
    }
  }
  return m;
}

}  // namespace

double haar_row_weight(int level, HaarOrientation o) {
  const double w = std::ldexp(1.0, level - 2);
  if (o != HaarOrientation::diagonal) return w;
  return w * (2.0 / 3.0 + 1.0 / (3.0 * std::ldexp(1.0, 2 * (level - 1))));
}

HaarCoeffs haar_transform(const GridImage& x) {
  const Grid grid(x.delta());
  const std::vector<double> m = cell_masses(grid, x);
  HaarCoeffs y{x.delta(), std::vector<double>(grid.pixels(), 0.0)};
  y.values[0] = haar_constant_weight(x.delta()) * m[0];
  for (std::size_t q = 0; q < grid.level_offset(0); ++q) {
    const int level = grid.level_of(q);
    const double w = haar_row_weight(level, HaarOrientation::horizontal);
    const double wd = haar_row_weight(level, HaarOrientation::diagonal);
    const auto c = grid.children(q);
    const double nw = m[c[0]], ne = m[c[1]], sw = m[c[2]], se = m[c[3]];
    y.values[haar_index(q, HaarOrientation::horizontal)] = w * (nw + sw - ne - se);
    y.values[haar_index(q, HaarOrientation::vertical)] = w * (nw + ne - sw - se);
    y.values[haar_index(q, HaarOrientation::diagonal)] = wd * (nw + se - ne - sw);
  }
  return y;
}

GridImage haar_inverse(const HaarCoeffs& y) {
  const Grid grid(y.delta);
  if (y.values.size() != grid.pixels()) throw std::invalid_argument("coefficient length does not match delta");
  std::vector<double> m(grid.cells(), 0.0);
  m[0] = y.values[0] / haar_constant_weight(y.delta);
  for (std::size_t q = 0; q < grid.level_offset(0); ++q) {
    const int level = grid.level_of(q);
    const double w = haar_row_weight(level, HaarOrientation::horizontal);
    const double h = y.values[haar_index(q, HaarOrientation::horizontal)] / w;
    const double v = y.values[haar_index(q, HaarOrientation::vertical)] / w;
    const double d = y.values[haar_index(q, HaarOrientation::diagonal)] / haar_row_weight(level, HaarOrientation::diagonal);
    const auto c = grid.children(q);
    m[c[0]] = (m[q] + h + v + d) / 4.0;
    m[c[1]] = (m[q] - h + v - d) / 4.0;
    m[c[2]] = (m[q] + h - v - d) / 4.0;
    m[c[3]] = (m[q] - h - v + d) / 4.0;
  }
  GridImage x(y.delta);
  const std::size_t leaf = grid.level_offset(0);
  for (std::size_t p = 0; p < x.size(); ++p) x[p] = m[leaf + p];
  return x;
}

std::vector<double> haar_matrix(int delta) {
  const Grid grid(delta);
  const std::size_t n = grid.pixels();
  std::vector<double> w(n * n, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    GridImage e(delta);
    e[p] = 1.0;
    const HaarCoeffs col = haar_transform(e);
    for (std::size_t r = 0; r < n; ++r) w[r * n + p] = col.values[r];
  }
  return w;
}

std::vector<std::size_t> lift_to_haar(const Grid& grid, const TreeSupport& support) {
  std::vector<std::size_t> out{0};
  for (std::size_t q : support.cells) {
    if (grid.level_of(q) == 0) continue;
    for (int o = 0; o < 3; ++o) out.push_back(haar_index(q, static_cast<HaarOrientation>(o)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

HaarAlignmentCertificate haar_alignment_certificate(const GridImage& x, int k, double eps,
                                                    const AlignmentOptions& options) {
  HaarAlignmentCertificate cert;
  cert.pyramid = alignment_certificate(x, k, eps, options);
  const Grid grid(x.delta());
  cert.coefficients = lift_to_haar(grid, cert.pyramid.support);
  const HaarCoeffs wx = haar_transform(x);
  cert.residual_l1 = l1_outside(wx.values, cert.coefficients);
  return cert;
}

}  // namespace emdsparse
