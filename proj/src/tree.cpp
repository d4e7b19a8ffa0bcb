#include "emdsparse/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace emdsparse {

CoefficientTree CoefficientTree::pyramid(int delta) {
  const Grid grid(delta);
  CoefficientTree t;
  t.parent_.resize(grid.cells());
  for (std::size_t q = 0; q < grid.cells(); ++q) {
    const std::size_t p = grid.parent(q);
    t.parent_[q] = p == Grid::npos ? npos : p;
  }
  t.offset_.resize(grid.cells() + 1);
  std::iota(t.offset_.begin(), t.offset_.end(), std::size_t{0});
  t.finish();
  return t;
}

CoefficientTree CoefficientTree::haar(int delta) {
  const Grid grid(delta);
  CoefficientTree t;
  // Node 0 is the constant; node q + 1 is cell q for every cell above level 0.
  const std::size_t inner = grid.level_offset(0);
  t.parent_.resize(inner + 1);
  t.parent_[0] = npos;
  for (std::size_t q = 0; q < inner; ++q) {
    const std::size_t p = grid.parent(q);
    t.parent_[q + 1] = p == Grid::npos ? 0 : p + 1;
  }
  t.offset_.resize(inner + 2);
  t.offset_[0] = 0;
  for (std::size_t v = 1; v <= inner + 1; ++v) t.offset_[v] = 1 + 3 * (v - 1);
  t.group_ = 3;
  t.finish();
  return t;
}

void CoefficientTree::finish() {
  const std::size_t n = parent_.size();
  std::vector<std::size_t> count(n + 1, 0);
  for (std::size_t v = 1; v < n; ++v) ++count[parent_[v] + 1];
  child_offset_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) child_offset_[v + 1] = child_offset_[v] + count[v + 1];
  child_.assign(n ? n - 1 : 0, 0);
  std::vector<std::size_t> fill(child_offset_.begin(), child_offset_.end() - 1);
  // Children keep the enumeration order of the node indices.
  for (std::size_t v = 1; v < n; ++v) child_[fill[parent_[v]]++] = v;
}

std::size_t CoefficientTree::node_of(std::size_t coefficient) const {
  if (coefficient >= coefficients()) throw std::out_of_range("coefficient index out of range");
  if (group_ == 1) return coefficient;
  return coefficient == 0 ? 0 : (coefficient - 1) / group_ + 1;
}

namespace {

double node_score(const CoefficientTree& tree, std::span<const double> y, std::size_t v, ProjectionScore score) {
  double s = 0.0;
  for (std::size_t c = tree.offset(v); c < tree.offset(v + 1); ++c)
    s += score == ProjectionScore::energy ? y[c] * y[c] : std::abs(y[c]);
  return s;
}

}  // namespace

std::vector<std::size_t> tree_project_nodes(const CoefficientTree& tree, std::span<const double> y,
                                            std::size_t budget, ProjectionScore score) {
  if (y.size() != tree.coefficients()) throw std::invalid_argument("coefficient length does not match tree");
  const std::size_t n = tree.nodes();
  std::vector<double> w(n), sub(n);
  for (std::size_t v = n; v-- > 0;) {
    w[v] = node_score(tree, y, v, score);
    sub[v] += w[v];
    if (v) sub[tree.parent(v)] += sub[v];
  }
  if (budget == 0 || sub[0] <= 0.0) return {};

  std::vector<std::size_t> cap(n, 0);
  std::vector<std::vector<double>> f(n);
  // choice[v][c][j]: budget handed to the c-th active child of v when the
  // first c + 1 active children share j units.
  std::vector<std::vector<std::vector<std::uint32_t>>> choice(n);
  std::vector<std::vector<std::size_t>> active(n);

  for (std::size_t v = n; v-- > 0;) {
    if (sub[v] <= 0.0) continue;
    const std::size_t cost = tree.cost(v);
    if (cost > budget) {
      cap[v] = 0;
      f[v].assign(1, 0.0);
      continue;
    }
    const std::size_t room = budget - cost;
    std::vector<double> g(1, 0.0);
    std::size_t used = 0;
    for (std::size_t ch : tree.children(v)) {
      if (sub[ch] <= 0.0 || cap[ch] == 0) continue;
      const std::size_t merged = std::min(room, used + cap[ch]);
      std::vector<double> next(merged + 1, 0.0);
      std::vector<std::uint32_t> pick(merged + 1, 0);
      const auto& fc = f[ch];
      for (std::size_t j = 0; j <= merged; ++j) {
        const std::size_t lo = j > used ? j - used : 0;
        const std::size_t hi = std::min(j, cap[ch]);
        double best = -1.0;
        std::uint32_t arg = 0;
        for (std::size_t a = lo; a <= hi; ++a) {
          const double val = g[j - a] + fc[a];
          if (val > best) {
            best = val;
            arg = static_cast<std::uint32_t>(a);
          }
        }
        next[j] = best;
        pick[j] = arg;
      }
      g.swap(next);
      used = merged;
      active[v].push_back(ch);
      choice[v].push_back(std::move(pick));
    }
    cap[v] = cost + used;
    f[v].assign(cap[v] + 1, 0.0);
    for (std::size_t j = cost; j <= cap[v]; ++j) f[v][j] = w[v] + g[j - cost];
  }

  std::vector<std::size_t> kept;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, std::min(budget, cap[0])}};
  while (!stack.empty()) {
    auto [v, a] = stack.back();
    stack.pop_back();
    if (a < tree.cost(v) || !(f[v][a] > 0.0)) continue;
    kept.push_back(v);
    std::size_t j = a - tree.cost(v);
    for (std::size_t c = active[v].size(); c-- > 0;) {
      const std::size_t give = choice[v][c][std::min(j, choice[v][c].size() - 1)];
      if (give) stack.push_back({active[v][c], give});
      j -= std::min(j, static_cast<std::size_t>(give));
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<std::size_t> tree_project_support(const CoefficientTree& tree, std::span<const double> y,
                                              std::size_t budget, ProjectionScore score) {
  std::vector<std::size_t> out;
  for (std::size_t v : tree_project_nodes(tree, y, budget, score))
    for (std::size_t c = tree.offset(v); c < tree.offset(v + 1); ++c) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> tree_project(const CoefficientTree& tree, std::span<const double> y, std::size_t budget,
                                 ProjectionScore score) {
  return restrict_to(y, tree_project_support(tree, y, budget, score));
}

std::vector<std::size_t> top_k_support(std::span<const double> y, std::size_t k) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] != 0.0) idx.push_back(i);
  auto better = [&](std::size_t a, std::size_t b) {
    const double fa = std::abs(y[a]), fb = std::abs(y[b]);
    return fa != fb ? fa > fb : a < b;
  };
  if (idx.size() > k) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
    idx.resize(k);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<double> restrict_to(std::span<const double> y, std::span<const std::size_t> support) {
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t i : support) out[i] = y[i];
  return out;
}

namespace {

TreeSupport support_closure(const Grid& grid, const std::vector<double>& values) {
  std::vector<std::size_t> nz;
  for (std::size_t q = 0; q < values.size(); ++q)
    if (values[q] != 0.0) nz.push_back(q);
  return close_under_parent(grid, nz);
}

}  // namespace

bool model_contains(const ModelSpec& spec, const PyramidCoeffs& y) {
  const Grid grid(y.delta);
  if (y.values.size() != grid.cells()) return false;
  if (spec.kind == ModelKind::general_sparse) {
    const auto nnz = std::count_if(y.values.begin(), y.values.end(), [](double v) { return v != 0.0; });
    return static_cast<std::size_t>(nnz) <= spec.K;
  }
  const TreeSupport closure = support_closure(grid, y.values);
  if (spec.K && closure.cells.size() > spec.K) return false;
  if (spec.kind == ModelKind::tree) return true;
  if (spec.s && max_width(grid, closure) > *spec.s) return false;
  if (spec.kind == ModelKind::tree_width) return true;
  for (std::size_t q = 0; q < y.values.size(); ++q) {
    const double v = y.values[q];
    if (v < 0.0) return false;
    if (grid.level_of(q) == 0) continue;
    double kids = 0.0;
    for (std::size_t r : grid.children(q)) kids += std::abs(y.values[r]);
    if (v - 2.0 * kids < -1e-12 * std::max(1.0, std::abs(v))) return false;
  }
  return true;
}

bool tree_model_contains(const CoefficientTree& tree, std::span<const double> y, std::size_t K) {
  if (y.size() != tree.coefficients()) return false;
  std::vector<char> mark(tree.nodes(), 0);
  std::size_t total = 0;
  for (std::size_t c = 0; c < y.size(); ++c) {
    if (y[c] == 0.0) continue;
    for (std::size_t v = tree.node_of(c); v != CoefficientTree::npos && !mark[v]; v = tree.parent(v)) {
      mark[v] = 1;
      total += tree.cost(v);
    }
  }
  return total <= K;
}

namespace {

int ceil_log4(std::size_t k) {
  int d = 0;
  std::size_t p = 1;
  while (p < k) {
    p *= 4;
    ++d;
  }
  return d;
}

}  // namespace

TreeSupport embed_sparse_in_tree(const Grid& grid, std::span<const std::size_t> pixels) {
  std::vector<std::size_t> cells;
  if (!pixels.empty()) {
    const int d = std::min(ceil_log4(pixels.size()), grid.levels());
    const std::size_t top_end = grid.level_offset(grid.levels() - d) + grid.level_size(grid.levels() - d);
    for (std::size_t q = 0; q < top_end; ++q) cells.push_back(q);
  }
  for (std::size_t p : pixels) {
    if (p >= grid.pixels()) throw std::invalid_argument("pixel index out of range");
    cells.push_back(grid.level_offset(0) + p);
  }
  return close_under_parent(grid, cells);
}

std::size_t claim_tree_size_bound(int delta, std::size_t k) {
  const Grid grid(delta);
  if (k == 0) return 0;
  const int d = std::min(ceil_log4(k), grid.levels());
  const std::size_t top = ((std::size_t{1} << (2 * (d + 1))) - 1) / 3;
  return std::min(grid.cells(), top + k * static_cast<std::size_t>(grid.levels() - d));
}

PyramidCoeffs project_value_tree(const PyramidCoeffs& y, std::size_t s) {
  const Grid grid(y.delta);
  if (y.values.size() != grid.cells()) throw std::invalid_argument("coefficient length does not match delta");
  PyramidCoeffs out{y.delta, std::vector<double>(grid.cells(), 0.0)};
  if (s == 0) return out;
  auto pos = [&](std::size_t q) { return std::max(0.0, y.values[q]); };
  std::vector<std::size_t> kept{0};
  out.values[0] = pos(0);
  for (int level = grid.levels() - 1; level >= 0; --level) {
    std::vector<std::size_t> cand;
    for (std::size_t q : kept)
      for (std::size_t r : grid.children(q))
        if (pos(r) > 0.0) cand.push_back(r);
    auto better = [&](std::size_t a, std::size_t b) { return pos(a) != pos(b) ? pos(a) > pos(b) : a < b; };
    if (cand.size() > s) {
      std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(s), cand.end(), better);
      cand.resize(s);
    }
    std::sort(cand.begin(), cand.end());
    for (std::size_t r : cand) out.values[r] = pos(r);
    for (std::size_t q : kept) {
      double sum = 0.0;
      for (std::size_t r : grid.children(q)) sum += out.values[r];
      const double limit = 0.5 * out.values[q];
      if (sum > limit) {
        const double scale = sum > 0.0 ? limit / sum : 0.0;
        for (std::size_t r : grid.children(q)) out.values[r] *= scale;
      }
    }
    kept = std::move(cand);
  }
  return out;
}

}  // namespace emdsparse
