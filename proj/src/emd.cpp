#include "emdsparse/emd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

namespace emdsparse {

namespace {

// Min-cost flow on the 4-neighbour grid graph. With unit-cost grid arcs the
// shortest path between two pixels has length |p - q|_1, so an optimal flow on
// this sparse graph is an optimal transport plan under the l1 ground metric.
// Solved by primal-dual: one Dijkstra per distinct path length, followed by a
// blocking-flow phase (Dinic) on the zero reduced-cost subgraph.
class GridFlow {
 public:
  struct Arc {
    int to;
    int rev;
    double cap;
    std::int64_t cost;
  };

  explicit GridFlow(int nodes) : adj_(nodes) {}

  int add_arc(int from, int to, double cap, std::int64_t cost) {
    const int id = static_cast<int>(arcs_.size());
    arcs_.push_back({to, id + 1, cap, cost});
    arcs_.push_back({from, id, 0.0, -cost});
    adj_[from].push_back(id);
    adj_[to].push_back(id + 1);
    original_cap_.push_back(cap);
    original_cap_.push_back(0.0);
    return id;
  }

  double flow(int arc) const { return original_cap_[arc] - arcs_[arc].cap; }

  double run(int source, int sink, double eps) {
    eps_ = eps;
    const int n = static_cast<int>(adj_.size());
    potential_.assign(n, 0);
    double total = 0.0;
    while (true) {
      if (!shortest_paths(source, sink)) break;
      const double pushed = blocking_flow(source, sink);
      if (pushed <= eps_) break;
      total += pushed;
    }
    return total;
  }

 private:
  std::int64_t reduced(int from, const Arc& a) const {
    return a.cost + potential_[from] - potential_[a.to];
  }

  bool shortest_paths(int source, int sink) {
    constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
    const int n = static_cast<int>(adj_.size());
    std::vector<std::int64_t> dist(n, inf);
    using Item = std::pair<std::int64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0;
    heap.push({0, source});
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (d != dist[u]) continue;
      for (int id : adj_[u]) {
        const Arc& a = arcs_[id];
        if (a.cap <= eps_) continue;
        const std::int64_t nd = d + reduced(u, a);
        if (nd < dist[a.to]) {
          dist[a.to] = nd;
          heap.push({nd, a.to});
        }
      }
    }
    if (dist[sink] >= inf) return false;
    for (int v = 0; v < n; ++v) potential_[v] += std::min(dist[v], dist[sink]);
    return true;
  }

  double blocking_flow(int source, int sink) {
    const int n = static_cast<int>(adj_.size());
    double total = 0.0;
    while (true) {
      level_.assign(n, -1);
      std::queue<int> q;
      level_[source] = 0;
      q.push(source);
      while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int id : adj_[u]) {
          const Arc& a = arcs_[id];
          if (a.cap > eps_ && level_[a.to] < 0 && reduced(u, a) == 0) {
            level_[a.to] = level_[u] + 1;
            q.push(a.to);
          }
        }
      }
      if (level_[sink] < 0) return total;
      next_.assign(n, 0);
      while (true) {
        const double f = augment(source, sink, std::numeric_limits<double>::infinity());
        if (f <= eps_) break;
        total += f;
      }
    }
  }

  double augment(int u, int sink, double limit) {
    if (u == sink) return limit;
    for (; next_[u] < adj_[u].size(); ++next_[u]) {
      const int id = adj_[u][next_[u]];
      Arc& a = arcs_[id];
      if (a.cap <= eps_ || level_[a.to] != level_[u] + 1 || reduced(u, a) != 0) continue;
      const double f = augment(a.to, sink, std::min(limit, a.cap));
      if (f > eps_) {
        a.cap -= f;
        arcs_[a.rev].cap += f;
        return f;
      }
    }
    return 0.0;
  }

  std::vector<Arc> arcs_;
  std::vector<double> original_cap_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::int64_t> potential_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
  double eps_ = 0.0;
};

int l1_pixel_distance(std::size_t a, std::size_t b, int delta) {
  const int ar = static_cast<int>(a / delta), ac = static_cast<int>(a % delta);
  const int br = static_cast<int>(b / delta), bc = static_cast<int>(b % delta);
  return std::abs(ar - br) + std::abs(ac - bc);
}

// Splits the optimal arc flow into source-to-sink legs. Optimal flows carry no
// positive-cost cycles, so every walk from a supply node ends at a demand node
// or at the dummy node; cycles made of rounding dust are cancelled if met.
FlowPlan decompose(int delta, std::vector<double> supply, std::vector<double> demand,
                   std::vector<std::array<double, 4>> out, std::vector<double> to_dummy,
                   double from_dummy_total, double eps) {
  const int n = static_cast<int>(supply.size());
  FlowPlan plan;
  plan.unmatched_mass = from_dummy_total;
  constexpr int kDummy = -1;
  auto neighbour = [delta](int p, int dir) {
    switch (dir) {
      case 0: return p + 1;
      case 1: return p - 1;
      case 2: return p + delta;
      default: return p - delta;
    }
  };
  std::vector<int> stamp(n, -1);
  std::vector<int> path;      // nodes
  std::vector<int> path_dir;  // dir taken from path[i]; 4 = dummy
  int walk_id = 0;
  for (int p = 0; p < n; ++p) {
    while (supply[p] > eps) {
      ++walk_id;
      path.assign(1, p);
      path_dir.clear();
      stamp[p] = walk_id;
      int end = p;
      while (true) {
        const int u = path.back();
        if (u != p && demand[u] > eps) {
          end = u;
          break;
        }
        int dir = -1;
        for (int d = 0; d < 4; ++d)
          if (out[u][d] > eps) {
            dir = d;
            break;
          }
        if (dir < 0 && to_dummy[u] > eps) {
          path_dir.push_back(4);
          end = kDummy;
          break;
        }
        if (dir < 0) {
          // Only dust remains on this walk: drop it.
          end = -2;
          break;
        }
        const int v = neighbour(u, dir);
        if (stamp[v] == walk_id) {
          // Cancel the cycle v -> ... -> u -> v.
          auto it = std::find(path.begin(), path.end(), v);
          const std::size_t start = static_cast<std::size_t>(it - path.begin());
          double m = out[u][dir];
          for (std::size_t i = start; i + 1 < path.size(); ++i)
            m = std::min(m, out[path[i]][path_dir[i]]);
          out[u][dir] -= m;
          for (std::size_t i = start; i + 1 < path.size(); ++i) out[path[i]][path_dir[i]] -= m;
          for (std::size_t i = start + 1; i < path.size(); ++i) stamp[path[i]] = -1;
          path.resize(start + 1);
          path_dir.resize(start);
          continue;
        }
        stamp[v] = walk_id;
        path_dir.push_back(dir);
        path.push_back(v);
      }
      if (end == -2) {
        supply[p] = 0.0;
        break;
      }
      double m = supply[p];
      for (std::size_t i = 0; i < path_dir.size(); ++i) {
        if (path_dir[i] == 4)
          m = std::min(m, to_dummy[path[i]]);
        else
          m = std::min(m, out[path[i]][path_dir[i]]);
      }
      if (end >= 0) m = std::min(m, demand[end]);
      supply[p] -= m;
      for (std::size_t i = 0; i < path_dir.size(); ++i) {
        if (path_dir[i] == 4)
          to_dummy[path[i]] -= m;
        else
          out[path[i]][path_dir[i]] -= m;
      }
      if (end >= 0) {
        demand[end] -= m;
        plan.edges.push_back({static_cast<std::size_t>(p), static_cast<std::size_t>(end), m});
      } else {
        plan.unmatched_mass += m;
      }
    }
  }
  return plan;
}

}  // namespace

double flow_cost(const FlowPlan& plan, int delta) {
  double cost = 0.0;
  for (const FlowEdge& e : plan.edges) cost += e.mass * l1_pixel_distance(e.source, e.sink, delta);
  return cost + unmatched_penalty(delta) * plan.unmatched_mass;
}

EmdResult emd_norm_with_plan(const GridImage& w) {
  const int delta = w.delta();
  const int n = static_cast<int>(w.size());
  double positive = 0.0, negative = 0.0;
  for (double v : w.values()) (v > 0 ? positive : negative) += std::abs(v);
  EmdResult result;
  if (positive == 0.0 && negative == 0.0) return result;

  const double scale = std::max(positive, negative);
  const double eps = 1e-13 * scale;
  const double infinite = 4.0 * scale + 1.0;
  const std::int64_t penalty = 2 * static_cast<std::int64_t>(delta);
  const int source = n, sink = n + 1, dummy = n + 2;

  GridFlow g(n + 3);
  std::vector<std::array<int, 4>> grid_arc(n, {-1, -1, -1, -1});
  for (int p = 0; p < n; ++p) {
    const int r = p / delta, c = p % delta;
    if (c + 1 < delta) {
      grid_arc[p][0] = g.add_arc(p, p + 1, infinite, 1);
      grid_arc[p + 1][1] = g.add_arc(p + 1, p, infinite, 1);
    }
    if (r + 1 < delta) {
      grid_arc[p][2] = g.add_arc(p, p + delta, infinite, 1);
      grid_arc[p + delta][3] = g.add_arc(p + delta, p, infinite, 1);
    }
  }
  std::vector<int> supply_arc(n, -1), demand_arc(n, -1), dummy_arc(n, -1);
  for (int p = 0; p < n; ++p) {
    if (w[p] > 0) supply_arc[p] = g.add_arc(source, p, w[p], 0);
    if (w[p] < 0) demand_arc[p] = g.add_arc(p, sink, -w[p], 0);
  }
  const double excess = positive - negative;
  if (excess > 0) {
    g.add_arc(dummy, sink, excess, 0);
    for (int p = 0; p < n; ++p)
      if (w[p] > 0) dummy_arc[p] = g.add_arc(p, dummy, infinite, penalty);
  } else if (excess < 0) {
    g.add_arc(source, dummy, -excess, 0);
    for (int p = 0; p < n; ++p)
      if (w[p] < 0) dummy_arc[p] = g.add_arc(dummy, p, infinite, penalty);
  }
  g.run(source, sink, eps);

  std::vector<double> supply(n, 0.0), demand(n, 0.0), to_dummy(n, 0.0);
  std::vector<std::array<double, 4>> out(n, {0.0, 0.0, 0.0, 0.0});
  double from_dummy = 0.0;
  double cost = 0.0;
  for (int p = 0; p < n; ++p) {
    if (supply_arc[p] >= 0) supply[p] = g.flow(supply_arc[p]);
    if (demand_arc[p] >= 0) demand[p] = g.flow(demand_arc[p]);
    for (int d = 0; d < 4; ++d)
      if (grid_arc[p][d] >= 0) {
        const double f = g.flow(grid_arc[p][d]);
        out[p][d] = f;
        cost += f;
      }
    if (dummy_arc[p] >= 0) {
      const double f = g.flow(dummy_arc[p]);
      cost += f * static_cast<double>(penalty);
      if (excess > 0) {
        to_dummy[p] = f;
      } else {
        from_dummy += f;
        demand[p] -= f;
      }
    }
  }
  // Opposite flows on the same grid edge cancel.
  for (int p = 0; p < n; ++p) {
    if (out[p][0] > 0 && p + 1 < n) {
      const double m = std::min(out[p][0], out[p + 1][1]);
      out[p][0] -= m;
      out[p + 1][1] -= m;
    }
    if (out[p][2] > 0 && p + delta < n) {
      const double m = std::min(out[p][2], out[p + delta][3]);
      out[p][2] -= m;
      out[p + delta][3] -= m;
    }
  }
  result.plan = decompose(delta, std::move(supply), std::move(demand), std::move(out),
                          std::move(to_dummy), from_dummy, 1e3 * eps);
  result.cost = cost;
  return result;
}

double emd_norm(const GridImage& w) { return emd_norm_with_plan(w).cost; }

double emd_distance(const GridImage& a, const GridImage& b) { return emd_norm(a - b); }

EmdResult emd_equal_mass(const GridImage& x, const GridImage& y) {
  if (x.delta() != y.delta()) throw std::invalid_argument("image sizes differ");
  if (!x.nonnegative() || !y.nonnegative())
    throw std::invalid_argument("emd_equal_mass requires nonnegative images");
  if (std::abs(x.total_mass() - y.total_mass()) > 1e-9)
    throw std::invalid_argument("emd_equal_mass requires equal total mass");
  return emd_norm_with_plan(x - y);
}

}  // namespace emdsparse
