#include "emdsparse/kmedian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace emdsparse {

std::size_t binomial_capped(std::size_t m, std::size_t k, std::size_t cap) {
  if (k > m) return 0;
  k = std::min(k, m - k);
  long double c = 1.0L;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<long double>(m - k + i) / static_cast<long double>(i);
    if (c > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::size_t>(std::llround(static_cast<double>(c)));
}

namespace {

struct Point {
  int row;
  int col;
  double weight;
};

struct Problem {
  std::vector<Point> points;
  std::vector<std::pair<int, int>> candidates;  // (row, col)
};

int dist(const Point& p, const std::pair<int, int>& c) {
  return std::abs(p.row - c.first) + std::abs(p.col - c.second);
}

double evaluate(const Problem& pr, const std::vector<std::size_t>& centers) {
  double cost = 0.0;
  for (const Point& p : pr.points) {
    int best = std::numeric_limits<int>::max();
    for (std::size_t c : centers) best = std::min(best, dist(p, pr.candidates[c]));
    cost += p.weight * best;
  }
  return cost;
}

// Weighted median of (coordinate, weight) pairs: smallest coordinate whose
// cumulative weight reaches half the total.
int weighted_median(std::vector<std::pair<int, double>> v) {
  std::sort(v.begin(), v.end());
  double total = 0.0;
  for (auto& e : v) total += e.second;
  double acc = 0.0;
  for (auto& e : v) {
    acc += e.second;
    if (acc >= 0.5 * total) return e.first;
  }
  return v.back().first;
}

class LocalSearch {
 public:
  LocalSearch(const Problem& pr, std::size_t k) : pr_(pr), k_(k) {
    for (std::size_t i = 0; i < pr.candidates.size(); ++i)
      index_[key(pr.candidates[i])] = i;
  }

  std::vector<std::size_t> greedy_seed() const {
    std::vector<std::size_t> centers;
    std::vector<double> d(pr_.points.size(), std::numeric_limits<double>::infinity());
    for (std::size_t step = 0; step < k_; ++step) {
      double best_cost = std::numeric_limits<double>::infinity();
      std::size_t best = 0;
      for (std::size_t c = 0; c < pr_.candidates.size(); ++c) {
        if (std::find(centers.begin(), centers.end(), c) != centers.end()) continue;
        double cost = 0.0;
        for (std::size_t i = 0; i < pr_.points.size(); ++i)
          cost += pr_.points[i].weight * std::min(d[i], double(dist(pr_.points[i], pr_.candidates[c])));
        if (cost < best_cost) {
          best_cost = cost;
          best = c;
        }
      }
      centers.push_back(best);
      for (std::size_t i = 0; i < pr_.points.size(); ++i)
        d[i] = std::min(d[i], double(dist(pr_.points[i], pr_.candidates[best])));
    }
    return centers;
  }

  std::vector<std::size_t> random_seed(std::mt19937_64& rng) const {
    std::vector<std::size_t> all(pr_.candidates.size());
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(k_);
    return all;
  }

  double improve(std::vector<std::size_t>& centers) const {
    double cost = evaluate(pr_, centers);
    while (true) {
      const double before = cost;
      cost = median_step(centers, cost);
      cost = swap_step(centers, cost);
      if (!(cost < before * (1 - 1e-12))) break;
    }
    return cost;
  }

 private:
  static long long key(const std::pair<int, int>& rc) {
    return (static_cast<long long>(rc.first) << 32) | static_cast<unsigned>(rc.second);
  }

  // Move every center to the coordinate-wise weighted median of its cluster.
  double median_step(std::vector<std::size_t>& centers, double cost) const {
    std::vector<std::vector<std::pair<int, double>>> rows(centers.size()), cols(centers.size());
    for (const Point& p : pr_.points) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < centers.size(); ++j)
        if (dist(p, pr_.candidates[centers[j]]) < dist(p, pr_.candidates[centers[best]])) best = j;
      rows[best].push_back({p.row, p.weight});
      cols[best].push_back({p.col, p.weight});
    }
    std::vector<std::size_t> moved = centers;
    for (std::size_t j = 0; j < centers.size(); ++j) {
      if (rows[j].empty()) continue;
      auto it = index_.find(key({weighted_median(rows[j]), weighted_median(cols[j])}));
      if (it != index_.end() && std::find(moved.begin(), moved.end(), it->second) == moved.end())
        moved[j] = it->second;
    }
    const double moved_cost = evaluate(pr_, moved);
    if (moved_cost < cost) {
      centers = moved;
      return moved_cost;
    }
    return cost;
  }

  // Best single (remove one center, add one candidate) exchange.
  double swap_step(std::vector<std::size_t>& centers, double cost) const {
    const std::size_t m = pr_.points.size();
    std::vector<int> d1(m), d2(m);
    std::vector<std::size_t> owner(m);
    for (std::size_t i = 0; i < m; ++i) {
      int a = std::numeric_limits<int>::max(), b = a;
      std::size_t who = 0;
      for (std::size_t j = 0; j < centers.size(); ++j) {
        const int d = dist(pr_.points[i], pr_.candidates[centers[j]]);
        if (d < a) {
          b = a;
          a = d;
          who = j;
        } else if (d < b) {
          b = d;
        }
      }
      d1[i] = a;
      d2[i] = b;
      owner[i] = who;
    }
    double best_cost = cost;
    std::size_t best_out = 0, best_in = 0;
    bool found = false;
    for (std::size_t c = 0; c < pr_.candidates.size(); ++c) {
      if (std::find(centers.begin(), centers.end(), c) != centers.end()) continue;
      for (std::size_t j = 0; j < centers.size(); ++j) {
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const int dc = dist(pr_.points[i], pr_.candidates[c]);
          const int keep = owner[i] == j ? d2[i] : d1[i];
          total += pr_.points[i].weight * std::min(keep, dc);
          if (total >= best_cost) break;
        }
        if (total < best_cost * (1 - 1e-12)) {
          best_cost = total;
          best_out = j;
          best_in = c;
          found = true;
        }
      }
    }
    if (found) centers[best_out] = best_in;
    return best_cost;
  }

  const Problem& pr_;
  std::size_t k_;
  std::unordered_map<long long, std::size_t> index_;
};

// Depth-first enumeration of all k-subsets, carrying the running nearest-center
// distance per point so each leaf costs O(points).
void enumerate(const Problem& pr, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
               const std::vector<int>& nearest, std::vector<std::size_t>& best, double& best_cost) {
  const std::size_t m = pr.points.size();
  std::vector<int> next(m);
  for (std::size_t i = start; i + (k - cur.size()) <= pr.candidates.size(); ++i) {
    double cost = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      next[p] = std::min(nearest[p], dist(pr.points[p], pr.candidates[i]));
      cost += pr.points[p].weight * next[p];
    }
    cur.push_back(i);
    if (cur.size() == k) {
      if (cost < best_cost) {
        best_cost = cost;
        best = cur;
      }
    } else {
      enumerate(pr, k, i + 1, cur, next, best, best_cost);
    }
    cur.pop_back();
  }
}

}  // namespace

KMedianResult weighted_k_median(const GridImage& x, int k, const KMedianOptions& options) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (!x.nonnegative()) throw std::invalid_argument("k-median requires a nonnegative image");
  const int delta = x.delta();
  Problem pr;
  std::vector<int> rows, cols;
  for (std::size_t i : x.support()) {
    const int r = static_cast<int>(i / delta), c = static_cast<int>(i % delta);
    pr.points.push_back({r, c, x[i]});
    rows.push_back(r);
    cols.push_back(c);
  }
  KMedianResult result;
  if (pr.points.size() <= static_cast<std::size_t>(k)) {
    for (const Point& p : pr.points) {
      result.centers.push_back(static_cast<std::size_t>(p.row) * delta + p.col);
      result.weights.push_back(p.weight);
    }
    result.exact = true;
    return result;
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  for (int r : rows)
    for (int c : cols) pr.candidates.push_back({r, c});

  const std::size_t kk = static_cast<std::size_t>(k);
  std::vector<std::size_t> best;
  double best_cost = std::numeric_limits<double>::infinity();
  if (binomial_capped(pr.candidates.size(), kk, options.exact_limit) <= options.exact_limit) {
    std::vector<std::size_t> cur;
    const std::vector<int> far(pr.points.size(), std::numeric_limits<int>::max() / 2);
    enumerate(pr, kk, 0, cur, far, best, best_cost);
    result.exact = true;
  } else {
    LocalSearch search(pr, kk);
    best = search.greedy_seed();
    best_cost = search.improve(best);
    std::mt19937_64 rng(options.seed);
    for (int r = 0; r < options.restarts; ++r) {
      auto centers = search.random_seed(rng);
      const double c = search.improve(centers);
      if (c < best_cost) {
        best_cost = c;
        best = centers;
      }
    }
  }

  result.cost = best_cost;
  result.weights.assign(best.size(), 0.0);
  for (std::size_t c : best)
    result.centers.push_back(static_cast<std::size_t>(pr.candidates[c].first) * delta +
                             pr.candidates[c].second);
  for (const Point& p : pr.points) {
    std::size_t who = 0;
    for (std::size_t j = 1; j < best.size(); ++j)
      if (dist(p, pr.candidates[best[j]]) < dist(p, pr.candidates[best[who]])) who = j;
    result.weights[who] += p.weight;
  }
  return result;
}

GridImage clustered_image(int delta, const KMedianResult& clustering) {
  GridImage out(delta);
  for (std::size_t j = 0; j < clustering.centers.size(); ++j)
    out[clustering.centers[j]] += clustering.weights[j];
  return out;
}

}  // namespace emdsparse
