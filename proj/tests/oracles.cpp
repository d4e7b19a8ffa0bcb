#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

namespace oracle {

namespace {

constexpr double kEps = 1e-9;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), t_((rows + 1) * (cols + 1), 0.0) {}
  double& at(std::size_t r, std::size_t c) { return t_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double p = at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) /= p;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
    }
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> t_;
};

// Objective row is `rows()`; minimizes with reduced costs stored in that row.
// Returns false when unbounded.
bool run_simplex(Tableau& t, std::vector<std::size_t>& basis, const std::vector<char>& allowed) {
  const std::size_t m = t.rows();
  while (true) {
    std::size_t enter = t.cols();
    for (std::size_t c = 0; c < t.cols(); ++c)
      if (allowed[c] && t.at(m, c) < -kEps) {
        enter = c;
        break;
      }
    if (enter == t.cols()) return true;
    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      if (t.at(r, enter) > kEps) {
        const double ratio = t.rhs(r) / t.at(r, enter);
        if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && leave < m && basis[r] < basis[leave])) {
          best = ratio;
          leave = r;
        }
      }
    }
    if (leave == m) return false;
    t.pivot(leave, enter);
    basis[leave] = enter;
  }
}

}  // namespace

std::optional<LpResult> linprog_eq(const std::vector<double>& c, const std::vector<std::vector<double>>& A,
                                   const std::vector<double>& b) {
  const std::size_t m = A.size(), n = c.size();
  Tableau t(m, n + m);
  for (std::size_t r = 0; r < m; ++r) {
    const double sign = b[r] < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t.at(r, j) = sign * A[r][j];
    t.at(r, n + r) = 1.0;
    t.rhs(r) = sign * b[r];
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = n + r;
  // Phase 1: minimize the artificial sum.
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = 0; j <= n + m; ++j)
      if (j < n || j == n + m) t.at(m, j) -= t.at(r, j);
  std::vector<char> all(n + m, 1);
  run_simplex(t, basis, all);
  double scale = 1.0;
  for (double v : b) scale += std::abs(v);
  if (-t.rhs(m) > 1e-9 * scale) return std::nullopt;
  // Drive artificials out of the basis where possible.
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] < n) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(t.at(r, j)) > 1e-9) {
        t.pivot(r, j);
        basis[r] = j;
        break;
      }
  }
  // Phase 2 objective.
  for (std::size_t j = 0; j <= n + m; ++j) t.at(m, j) = j < n ? c[j] : 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] >= n) continue;
    const double f = t.at(m, basis[r]);
    if (f == 0.0) continue;
    for (std::size_t j = 0; j <= n + m; ++j) t.at(m, j) -= f * t.at(r, j);
  }
  std::vector<char> structural(n + m, 0);
  std::fill(structural.begin(), structural.begin() + static_cast<std::ptrdiff_t>(n), 1);
  if (!run_simplex(t, basis, structural)) return std::nullopt;
  LpResult res;
  res.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < n) res.x[basis[r]] = t.rhs(r);
  res.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.value += c[j] * res.x[j];
  return res;
}

double lp_emd_norm(const emdsparse::GridImage& w) {
  const int delta = w.delta();
  const std::size_t n = w.size();
  const double penalty = 2.0 * delta;
  std::vector<double> c;
  std::vector<std::vector<double>> A(n);
  auto add_column = [&](double cost, std::size_t out, std::size_t in, bool has_in, double out_coef) {
    c.push_back(cost);
    for (std::size_t r = 0; r < n; ++r) A[r].push_back(0.0);
    A[out].back() += out_coef;
    if (has_in) A[in].back() -= 1.0;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const int d = std::abs(int(i / delta) - int(j / delta)) + std::abs(int(i % delta) - int(j % delta));
      add_column(d, i, j, true, 1.0);
    }
  for (std::size_t i = 0; i < n; ++i) {
    add_column(penalty, i, 0, false, 1.0);
    add_column(penalty, i, 0, false, -1.0);
  }
  const auto res = linprog_eq(c, A, w.values());
  if (!res) throw std::runtime_error("EMD LP failed");
  return res->value;
}

double lp_min_pyramid_residual(const emdsparse::PyramidCoeffs& b) {
  const emdsparse::Grid grid(b.delta);
  const std::size_t n = grid.pixels(), t = grid.cells();
  // Variables: u (n), v (n), e+ (t), e- (t); y = u - v.
  std::vector<std::vector<double>> A(t, std::vector<double>(2 * n + 2 * t, 0.0));
  std::vector<double> c(2 * n + 2 * t, 0.0);
  for (std::size_t q = 0; q < t; ++q) {
    const auto cell = grid.cell(q);
    const int len = 1 << cell.level;
    for (int r = cell.row * len; r < (cell.row + 1) * len; ++r)
      for (int col = cell.col * len; col < (cell.col + 1) * len; ++col) {
        const std::size_t p = grid.pixel_index(r, col);
        A[q][p] += len;
        A[q][n + p] -= len;
      }
    A[q][2 * n + q] = 1.0;
    A[q][2 * n + t + q] = -1.0;
    c[2 * n + q] = 1.0;
    c[2 * n + t + q] = 1.0;
  }
  const auto res = linprog_eq(c, A, b.values);
  if (!res) throw std::runtime_error("pyramid residual LP failed");
  return res->value;
}

double brute_force_transport(const emdsparse::GridImage& x, const emdsparse::GridImage& y) {
  const int delta = x.delta();
  const auto sx = x.support(), sy = y.support();
  std::vector<long> supply, demand;
  for (std::size_t p : sx) supply.push_back(std::lround(x[p]));
  for (std::size_t p : sy) demand.push_back(std::lround(y[p]));
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::abs(int(a / delta) - int(b / delta)) + std::abs(int(a % delta) - int(b % delta));
  };
  double best = std::numeric_limits<double>::infinity();
  // Assign each supply's units across demands recursively.
  std::function<void(std::size_t, std::size_t, long, double)> go = [&](std::size_t i, std::size_t j, long left,
                                                                       double cost) {
    if (cost >= best) return;
    if (i == sx.size()) {
      best = cost;
      return;
    }
    if (left == 0) {
      go(i + 1, 0, i + 1 < sx.size() ? supply[i + 1] : 0, cost);
      return;
    }
    if (j == sy.size()) return;
    const long cap = std::min(left, demand[j]);
    for (long a = cap; a >= 0; --a) {
      demand[j] -= a;
      go(i, j + 1, left - a, cost + double(a) * dist(sx[i], sy[j]));
      demand[j] += a;
    }
  };
  if (sx.empty()) return 0.0;
  go(0, 0, supply[0], 0.0);
  return best;
}

std::vector<double> naive_pyramid(const emdsparse::GridImage& x) {
  const emdsparse::Grid grid(x.delta());
  std::vector<double> out(grid.cells(), 0.0);
  for (std::size_t q = 0; q < grid.cells(); ++q) {
    const auto cell = grid.cell(q);
    const int len = 1 << cell.level;
    double s = 0.0;
    for (int r = cell.row * len; r < (cell.row + 1) * len; ++r)
      for (int c = cell.col * len; c < (cell.col + 1) * len; ++c) s += x.at(r, c);
    out[q] = len * s;
  }
  return out;
}

std::vector<double> naive_haar_matrix(int delta) {
  const emdsparse::Grid grid(delta);
  const std::size_t n = grid.pixels();
  std::vector<double> w(n * n, 0.0);
  for (std::size_t p = 0; p < n; ++p) w[p] = 2.0 * delta;
  std::size_t row = 1;
  for (int level = grid.levels(); level >= 1; --level) {
    const int len = 1 << level, half = len / 2;
    const double scale = std::ldexp(1.0, level - 2);
    const double diag = scale * (2.0 * std::pow(4.0, level - 1) + 1.0) / (3.0 * std::pow(4.0, level - 1));
    for (int cr = 0; cr < grid.side(level); ++cr)
      for (int cc = 0; cc < grid.side(level); ++cc) {
        for (int o = 0; o < 3; ++o, ++row) {
          for (int r = cr * len; r < (cr + 1) * len; ++r)
            for (int c = cc * len; c < (cc + 1) * len; ++c) {
              const bool top = r < cr * len + half, left = c < cc * len + half;
              double sgn = 0.0;
              if (o == 0) sgn = left ? 1.0 : -1.0;
              if (o == 1) sgn = top ? 1.0 : -1.0;
              if (o == 2) sgn = (top == left) ? 1.0 : -1.0;
              w[row * n + grid.pixel_index(r, c)] = (o == 2 ? diag : scale) * sgn;
            }
        }
      }
  }
  return w;
}

std::vector<std::vector<std::size_t>> rooted_subtrees(const emdsparse::Grid& grid, std::size_t K) {
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::vector<std::size_t>> frontier{{0}};
  seen.insert({0});
  while (!frontier.empty()) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& tree : frontier) {
      if (tree.size() >= K) continue;
      for (std::size_t q : tree) {
        if (grid.level_of(q) == 0) continue;
        for (std::size_t r : grid.children(q)) {
          if (std::binary_search(tree.begin(), tree.end(), r)) continue;
          auto grown = tree;
          grown.insert(std::upper_bound(grown.begin(), grown.end(), r), r);
          if (seen.insert(grown).second) next.push_back(std::move(grown));
        }
      }
    }
    frontier = std::move(next);
  }
  if (K == 0) return {{}};
  std::vector<std::vector<std::size_t>> out(seen.begin(), seen.end());
  out.push_back({});
  return out;
}

double brute_force_tree_energy(const emdsparse::Grid& grid, const std::vector<double>& y, std::size_t K) {
  double best = 0.0;
  for (const auto& tree : rooted_subtrees(grid, K)) {
    double e = 0.0;
    for (std::size_t q : tree) e += y[q] * y[q];
    best = std::max(best, e);
  }
  return best;
}

double brute_force_one_median(const emdsparse::GridImage& x) {
  const int delta = x.delta();
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < delta; ++r)
    for (int c = 0; c < delta; ++c) {
      double cost = 0.0;
      for (std::size_t p : x.support())
        cost += x[p] * (std::abs(int(p / delta) - r) + std::abs(int(p % delta) - c));
      best = std::min(best, cost);
    }
  return best;
}

double brute_force_two_median_on_support(const emdsparse::GridImage& x) {
  const int delta = x.delta();
  const auto sup = x.support();
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::abs(int(a / delta) - int(b / delta)) + std::abs(int(a % delta) - int(b % delta));
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sup.size(); ++i)
    for (std::size_t j = i + 1; j < sup.size(); ++j) {
      double cost = 0.0;
      for (std::size_t p : sup) cost += x[p] * std::min(dist(p, sup[i]), dist(p, sup[j]));
      best = std::min(best, cost);
    }
  return best;
}

emdsparse::GridImage random_sparse_image(int delta, int points, int max_mass, std::mt19937_64& rng) {
  emdsparse::GridImage x(delta);
  std::uniform_int_distribution<std::size_t> pix(0, x.size() - 1);
  std::uniform_int_distribution<int> mass(1, max_mass);
  int placed = 0;
  while (placed < points && placed < int(x.size())) {
    const std::size_t p = pix(rng);
    if (x[p] != 0.0) continue;
    x[p] = mass(rng);
    ++placed;
  }
  return x;
}

emdsparse::GridImage random_signed_image(int delta, double density, std::mt19937_64& rng) {
  emdsparse::GridImage x(delta);
  std::uniform_real_distribution<double> u(-1.0, 1.0), coin(0.0, 1.0);
  for (std::size_t p = 0; p < x.size(); ++p)
    if (coin(rng) < density) x[p] = u(rng);
  return x;
}

emdsparse::PyramidCoeffs from_surpluses(const emdsparse::Grid& grid, const std::vector<double>& s) {
  emdsparse::PyramidCoeffs b{grid.delta(), std::vector<double>(grid.cells())};
  for (std::size_t q = grid.cells(); q-- > 0;) {
    const int i = grid.level_of(q);
    double v = s[q];
    if (i > 0)
      for (std::size_t r : grid.children(q)) v += b.values[r] / std::ldexp(1.0, i - 1);
    b.values[q] = std::ldexp(v, i);
  }
  return b;
}

emdsparse::PyramidCoeffs random_nonneg_coeffs(int delta, std::mt19937_64& rng) {
  const emdsparse::Grid grid(delta);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  emdsparse::PyramidCoeffs b{delta, std::vector<double>(grid.cells())};
  for (std::size_t q = 0; q < grid.cells(); ++q)
    b.values[q] = u(rng) < 0.3 ? 0.0 : std::ldexp(u(rng) * 4.0, grid.level_of(q));
  return b;
}

}  // namespace oracle
