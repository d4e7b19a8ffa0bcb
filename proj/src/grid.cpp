#include "emdsparse/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace emdsparse {

bool valid_delta(int delta) {
  return delta >= 1 && delta <= kMaxDelta && std::has_single_bit(static_cast<unsigned>(delta));
}

void require_delta(int delta) {
  if (!valid_delta(delta))
    throw std::invalid_argument("delta must be a power of two in [1, 4096], got " +
                                std::to_string(delta));
}

std::vector<CellId> children(const CellId& c) {
  if (c.level == 0) return {};
  const int l = c.level - 1, r = 2 * c.row, k = 2 * c.col;
  return {{l, r, k}, {l, r, k + 1}, {l, r + 1, k}, {l, r + 1, k + 1}};
}

std::optional<CellId> parent(const CellId& c, int delta) {
  require_delta(delta);
  if ((delta >> c.level) <= 1) return std::nullopt;
  return CellId{c.level + 1, c.row / 2, c.col / 2};
}

Grid::Grid(int delta) : delta_(delta) {
  require_delta(delta);
  levels_ = std::countr_zero(static_cast<unsigned>(delta));
  offsets_.assign(levels_ + 2, 0);
  // Root first: level l occupies [0, 1), level l-1 the next 4 slots, ...
  std::size_t acc = 0;
  for (int level = levels_; level >= 0; --level) {
    offsets_[level] = acc;
    acc += level_size(level);
  }
  offsets_[levels_ + 1] = 0;
  cells_ = acc;
}

bool Grid::contains(const CellId& c) const {
  return c.level >= 0 && c.level <= levels_ && c.row >= 0 && c.col >= 0 &&
         c.row < side(c.level) && c.col < side(c.level);
}

std::size_t Grid::index(const CellId& c) const {
  if (!contains(c))
    throw std::invalid_argument("cell (" + std::to_string(c.level) + ", " + std::to_string(c.row) +
                                ", " + std::to_string(c.col) + ") outside grid of side " +
                                std::to_string(delta_));
  return offsets_[c.level] + static_cast<std::size_t>(c.row) * side(c.level) + c.col;
}

int Grid::level_of(std::size_t index) const {
  if (index >= cells_) throw std::invalid_argument("cell index out of range");
  int level = levels_;
  while (level > 0 && index >= offsets_[level - 1]) --level;
  return level;
}

CellId Grid::cell(std::size_t index) const {
  const int level = level_of(index);
  const std::size_t local = index - offsets_[level];
  const int s = side(level);
  return {level, static_cast<int>(local / s), static_cast<int>(local % s)};
}

std::size_t Grid::parent(std::size_t index) const {
  if (index == 0) return npos;
  const CellId c = cell(index);
  return offsets_[c.level + 1] + static_cast<std::size_t>(c.row / 2) * side(c.level + 1) + c.col / 2;
}

std::array<std::size_t, 4> Grid::children(std::size_t index) const {
  const CellId c = cell(index);
  if (c.level == 0) throw std::invalid_argument("level-0 cells have no children");
  const int s = side(c.level - 1);
  const std::size_t base =
      offsets_[c.level - 1] + static_cast<std::size_t>(2 * c.row) * s + 2 * c.col;
  return {base, base + 1, base + s, base + s + 1};
}

std::size_t Grid::cell_containing(int row, int col, int level) const {
  return offsets_[level] + static_cast<std::size_t>(row >> level) * side(level) + (col >> level);
}

std::size_t Grid::center_pixel(std::size_t index) const {
  const CellId c = cell(index);
  const int span = 1 << c.level;
  const int off = (span - 1) / 2;
  return pixel_index(c.row * span + off, c.col * span + off);
}

std::size_t cell_index(const CellId& c, int delta) { return Grid(delta).index(c); }

GridImage::GridImage(int delta) : delta_(delta) {
  require_delta(delta);
  values_.assign(static_cast<std::size_t>(delta) * delta, 0.0);
}

GridImage::GridImage(int delta, std::vector<double> values) : delta_(delta), values_(std::move(values)) {
  require_delta(delta);
  if (values_.size() != static_cast<std::size_t>(delta) * delta)
    throw std::invalid_argument("image of side " + std::to_string(delta) + " needs " +
                                std::to_string(static_cast<std::size_t>(delta) * delta) +
                                " values, got " + std::to_string(values_.size()));
}

double GridImage::l1_norm() const { return emdsparse::l1_norm(values_); }

double GridImage::total_mass() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

bool GridImage::nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

std::vector<std::size_t> GridImage::support() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] != 0.0) out.push_back(i);
  return out;
}

namespace {
void require_same_delta(const GridImage& a, const GridImage& b) {
  if (a.delta() != b.delta()) throw std::invalid_argument("image sizes differ");
}
}  // namespace

GridImage operator+(const GridImage& a, const GridImage& b) {
  require_same_delta(a, b);
  GridImage out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

GridImage operator-(const GridImage& a, const GridImage& b) {
  require_same_delta(a, b);
  GridImage out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

GridImage operator*(double s, const GridImage& a) {
  GridImage out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

TreeSupport close_under_parent(const Grid& grid, std::span<const std::size_t> cells) {
  std::vector<char> mark(grid.cells(), 0);
  for (std::size_t c : cells) {
    if (c >= grid.cells()) throw std::invalid_argument("cell index out of range");
    for (std::size_t q = c; q != Grid::npos && !mark[q]; q = grid.parent(q)) mark[q] = 1;
  }
  TreeSupport out;
  for (std::size_t q = 0; q < mark.size(); ++q)
    if (mark[q]) out.cells.push_back(q);
  return out;
}

bool is_valid_tree(const Grid& grid, const TreeSupport& support) {
  if (support.cells.empty()) return true;
  if (!std::is_sorted(support.cells.begin(), support.cells.end())) return false;
  if (std::adjacent_find(support.cells.begin(), support.cells.end()) != support.cells.end())
    return false;
  if (support.cells.front() != 0 || support.cells.back() >= grid.cells()) return false;
  for (std::size_t q : support.cells) {
    if (q == 0) continue;
    if (!std::binary_search(support.cells.begin(), support.cells.end(), grid.parent(q)))
      return false;
  }
  if (support.width_bound && max_width(grid, support) > *support.width_bound) return false;
  return true;
}

std::size_t max_width(const Grid& grid, const TreeSupport& support) {
  std::vector<std::size_t> per_level(grid.levels() + 1, 0);
  for (std::size_t q : support.cells) ++per_level[grid.level_of(q)];
  return per_level.empty() ? 0 : *std::max_element(per_level.begin(), per_level.end());
}

double l1_outside(std::span<const double> values, std::span<const std::size_t> support) {
  std::vector<char> in(values.size(), 0);
  for (std::size_t q : support) in[q] = 1;
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!in[i]) s += std::abs(values[i]);
  return s;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace emdsparse
