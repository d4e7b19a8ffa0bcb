#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace emdsparse {

inline constexpr int kMaxDelta = 1 << 12;

/// True iff delta is a power of two in [1, kMaxDelta].
bool valid_delta(int delta);

/// Throws std::invalid_argument unless valid_delta(delta).
void require_delta(int delta);

/// A cell of the dyadic grid at `level`; covers pixels
/// [row*2^level, (row+1)*2^level) x [col*2^level, (col+1)*2^level).
struct CellId {
  int level = 0;
  int row = 0;
  int col = 0;

  auto operator<=>(const CellId&) const = default;
};

/// Quadtree children in NW, NE, SW, SE order. Empty at level 0.
std::vector<CellId> children(const CellId& c);

/// Parent cell, or nullopt for the root of a delta x delta grid.
std::optional<CellId> parent(const CellId& c, int delta);

/// Geometry of the nested grids G_0 (pixels) ... G_l (root) on a delta x delta
/// image, together with the level-major, root-first cell enumeration used by
/// every coefficient vector in the library.
///
/// Index 0 is the root; levels follow in descending order and cells within a
/// level are row-major. Parents always precede their children.
class Grid {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit Grid(int delta);

  int delta() const { return delta_; }
  /// l = log2(delta); the root lives at level l.
  int levels() const { return levels_; }
  std::size_t pixels() const { return static_cast<std::size_t>(delta_) * delta_; }
  /// t = (4n - 1) / 3.
  std::size_t cells() const { return cells_; }

  /// Cells per row at `level`.
  int side(int level) const { return delta_ >> level; }
  std::size_t level_size(int level) const {
    return static_cast<std::size_t>(side(level)) * side(level);
  }
  std::size_t level_offset(int level) const { return offsets_[level]; }

  bool contains(const CellId& c) const;
  std::size_t index(const CellId& c) const;
  CellId cell(std::size_t index) const;
  int level_of(std::size_t index) const;

  /// Parent index, or npos for the root.
  std::size_t parent(std::size_t index) const;
  /// Child indices (NW, NE, SW, SE). Only valid above level 0.
  std::array<std::size_t, 4> children(std::size_t index) const;

  /// Index of the level-`level` cell containing pixel (row, col).
  std::size_t cell_containing(int row, int col, int level) const;
  std::size_t pixel_index(int row, int col) const {
    return static_cast<std::size_t>(row) * delta_ + col;
  }
  /// The representative pixel of a cell: offset floor((2^i - 1) / 2) on each axis.
  std::size_t center_pixel(std::size_t index) const;

 private:
  int delta_;
  int levels_;
  std::size_t cells_;
  std::vector<std::size_t> offsets_;  // offsets_[level], plus a sentinel at levels_ + 1
};

/// Position of `c` in the root-first enumeration of a delta x delta grid.
std::size_t cell_index(const CellId& c, int delta);

/// Delta x delta real-valued image, row-major.
class GridImage {
 public:
  GridImage() = default;
  explicit GridImage(int delta);
  GridImage(int delta, std::vector<double> values);

  int delta() const { return delta_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * delta_ + col]; }
  double& at(int row, int col) { return values_[static_cast<std::size_t>(row) * delta_ + col]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double l1_norm() const;
  double total_mass() const;
  bool nonnegative() const;
  std::vector<std::size_t> support() const;

  friend GridImage operator+(const GridImage& a, const GridImage& b);
  friend GridImage operator-(const GridImage& a, const GridImage& b);
  friend GridImage operator*(double s, const GridImage& a);
  bool operator==(const GridImage&) const = default;

 private:
  int delta_ = 1;
  std::vector<double> values_ = std::vector<double>(1, 0.0);
};

/// Image of the pyramid map: one value per grid cell in Grid enumeration order.
struct PyramidCoeffs {
  int delta = 1;
  std::vector<double> values;
};

/// Rooted, parent-closed set of cell indices (sorted ascending).
struct TreeSupport {
  std::vector<std::size_t> cells;
  std::optional<std::size_t> width_bound;
};

/// Parent-closure of an arbitrary cell set; result is sorted and contains the
/// root whenever the input is nonempty.
TreeSupport close_under_parent(const Grid& grid, std::span<const std::size_t> cells);

/// Checks the TreeSupport invariants (rooted, parent-closed, width bound).
bool is_valid_tree(const Grid& grid, const TreeSupport& support);

/// Maximum number of cells on a single level.
std::size_t max_width(const Grid& grid, const TreeSupport& support);

/// Sum of |v_q| over q outside the support.
double l1_outside(std::span<const double> values, std::span<const std::size_t> support);

double l1_norm(std::span<const double> v);
double l1_distance(std::span<const double> a, std::span<const double> b);

}  // namespace emdsparse
