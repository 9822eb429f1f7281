#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "webcent/emd.hpp"
#include "webcent/error.hpp"

namespace webcent::emd {

namespace {

constexpr double kIntegralTolerance = 1e-9;
constexpr double kBalanceTolerance = 1e-9;
// Keeps flow * cost sums far from int64 overflow.
constexpr double kLatticeLimit = 9.0e15;

// Primal-dual min-cost flow: Dijkstra on reduced costs to update node
// potentials, then a blocking flow over the zero-reduced-cost subgraph. Each
// phase pushes along every currently shortest augmenting path at once.
class MinCostFlow {
 public:
  struct Edge {
    int to;
    int rev;
    std::int64_t cap;
    std::int64_t cost;
  };

  explicit MinCostFlow(int nodes) : graph_(nodes), potential_(nodes, 0) {}

  // Returns the index of the forward edge within graph_[from].
  int add_edge(int from, int to, std::int64_t cap, std::int64_t cost) {
    graph_[from].push_back({to, static_cast<int>(graph_[to].size()), cap, cost});
    graph_[to].push_back({from, static_cast<int>(graph_[from].size()) - 1, 0, -cost});
    return static_cast<int>(graph_[from].size()) - 1;
  }

  std::int64_t run(int source, int sink) {
    std::int64_t flow = 0;
    while (update_potentials(source, sink)) {
      const std::int64_t pushed = blocking_flow(source, sink);
      if (pushed == 0) break;
      flow += pushed;
    }
    return flow;
  }

  const Edge& edge(int node, int index) const { return graph_[node][index]; }
  const Edge& reverse(const Edge& e) const { return graph_[e.to][e.rev]; }

 private:
  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

  std::int64_t reduced(int from, const Edge& e) const {
    return e.cost + potential_[from] - potential_[e.to];
  }

  bool update_potentials(int source, int sink) {
    const int n = static_cast<int>(graph_.size());
    std::vector<std::int64_t> dist(n, kInf);
    using Item = std::pair<std::int64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0;
    heap.emplace(0, source);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d != dist[u]) continue;
      for (const Edge& e : graph_[u]) {
        if (e.cap <= 0) continue;
        const std::int64_t nd = d + reduced(u, e);
        if (nd < dist[e.to]) {
          dist[e.to] = nd;
          heap.emplace(nd, e.to);
        }
      }
    }
    if (dist[sink] == kInf) return false;
    // Nodes unreachable now stay unreachable: augmentation only adds residual
    // edges between reachable nodes.
    for (int v = 0; v < n; ++v) {
      if (dist[v] != kInf) potential_[v] += dist[v];
    }
    return true;
  }

  bool admissible(int from, const Edge& e) const {
    return e.cap > 0 && reduced(from, e) == 0 && level_[e.to] == level_[from] + 1;
  }

  std::int64_t blocking_flow(int source, int sink) {
    const int n = static_cast<int>(graph_.size());
    level_.assign(n, -1);
    std::queue<int> bfs;
    level_[source] = 0;
    bfs.push(source);
    while (!bfs.empty()) {
      const int u = bfs.front();
      bfs.pop();
      for (const Edge& e : graph_[u]) {
        if (e.cap > 0 && reduced(u, e) == 0 && level_[e.to] < 0) {
          level_[e.to] = level_[u] + 1;
          bfs.push(e.to);
        }
      }
    }
    if (level_[sink] < 0) return 0;

    next_edge_.assign(n, 0);
    std::int64_t total = 0;
    // Iterative DFS; `path` holds (node, edge index) pairs from the source.
    std::vector<std::pair<int, int>> path;
    int u = source;
    while (true) {
      if (u == sink) {
        std::int64_t bottleneck = kInf;
        for (const auto& [node, idx] : path) bottleneck = std::min(bottleneck, graph_[node][idx].cap);
        std::size_t retreat_to = path.size();
        for (std::size_t k = 0; k < path.size(); ++k) {
          auto& [node, idx] = path[k];
          Edge& e = graph_[node][idx];
          e.cap -= bottleneck;
          graph_[e.to][e.rev].cap += bottleneck;
          if (e.cap == 0 && retreat_to == path.size()) retreat_to = k;
        }
        total += bottleneck;
        u = path[retreat_to].first;
        path.resize(retreat_to);
        continue;
      }
      bool advanced = false;
      auto& it = next_edge_[u];
      for (; it < static_cast<int>(graph_[u].size()); ++it) {
        const Edge& e = graph_[u][it];
        if (admissible(u, e)) {
          path.emplace_back(u, it);
          u = e.to;
          advanced = true;
          break;
        }
      }
      if (advanced) continue;
      if (u == source) break;
      level_[u] = -1;  // dead end for this phase
      u = path.back().first;
      path.pop_back();
      ++next_edge_[u];
    }
    return total;
  }

  std::vector<std::vector<Edge>> graph_;
  std::vector<std::int64_t> potential_;
  std::vector<int> level_;
  std::vector<int> next_edge_;
};

struct Lattice {
  std::vector<std::int64_t> units;
  double scale = 1.0;
};

Lattice to_lattice(const DiscreteDistribution& dist, double scale) {
  Lattice lattice;
  lattice.scale = scale;
  lattice.units.reserve(dist.size());
  for (double m : dist.masses()) {
    const double scaled = m * scale;
    if (scaled > kLatticeLimit) throw InvalidArgument("mass too large for exact oracle");
    lattice.units.push_back(std::llround(scaled));
  }
  return lattice;
}

// Rounding can leave the two lattices a few units apart; absorb the residual
// into the largest bucket of the heavier side.
void rebalance(Lattice& a, Lattice& b) {
  const auto sum_a = std::accumulate(a.units.begin(), a.units.end(), std::int64_t{0});
  const auto sum_b = std::accumulate(b.units.begin(), b.units.end(), std::int64_t{0});
  if (sum_a == sum_b) return;
  Lattice& heavy = sum_a > sum_b ? a : b;
  const std::int64_t excess = std::abs(sum_a - sum_b);
  auto largest = std::max_element(heavy.units.begin(), heavy.units.end());
  if (*largest < excess) throw InvalidArgument("unbalanced problem");
  *largest -= excess;
}

void check_balance(const DiscreteDistribution& a, const DiscreteDistribution& b) {
  const double ta = a.total();
  const double tb = b.total();
  if (std::abs(ta - tb) > kBalanceTolerance * std::max(1.0, std::max(ta, tb))) {
    throw InvalidArgument("unbalanced problem");
  }
}

double plan_work(const std::vector<Flow>& flows, const GroundDistance& distance) {
  long double work = 0.0L;
  for (const Flow& f : flows) work += static_cast<long double>(f.amount) * distance(f.from, f.to);
  return static_cast<double>(work);
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> masses) : masses_(std::move(masses)) {
  bool positive = false;
  for (double m : masses_) {
    if (!std::isfinite(m) || m < 0.0) throw InvalidArgument("masses must be finite and non-negative");
    positive = positive || m > 0.0;
  }
  if (!positive) throw InvalidArgument("distribution has no positive mass");
}

double DiscreteDistribution::total() const {
  long double sum = 0.0L;
  for (double m : masses_) sum += m;
  return static_cast<double>(sum);
}

bool DiscreteDistribution::integral() const {
  return std::all_of(masses_.begin(), masses_.end(),
                     [](double m) { return std::abs(m - std::round(m)) <= kIntegralTolerance; });
}

GroundDistance GroundDistance::constant(double value) {
  return GroundDistance([value](std::size_t, std::size_t) { return value; });
}

GroundDistance GroundDistance::from_matrix(std::vector<std::vector<double>> matrix) {
  return GroundDistance(
      [m = std::move(matrix)](std::size_t i, std::size_t j) { return m.at(i).at(j); });
}

GroundDistance GroundDistance::transposed() const {
  return GroundDistance([fn = fn_](std::size_t i, std::size_t j) { return fn(j, i); });
}

DiscreteDistribution decentralized_reference(std::uint64_t sites) {
  if (sites == 0) throw InvalidArgument("reference needs at least one site");
  return DiscreteDistribution(std::vector<double>(sites, 1.0));
}

FlowPlan solve_transport(const DiscreteDistribution& source, const DiscreteDistribution& target,
                         const GroundDistance& distance, const TransportOptions& options) {
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  if (n == 0 || m == 0) throw InvalidArgument("empty distribution");
  if (n > options.max_cells / m || n * m > options.max_cells) {
    throw InvalidArgument("instance too large for exact oracle");
  }
  check_balance(source, target);

  const bool integral = source.integral() && target.integral();
  const double mass_scale = integral ? 1.0 : options.mass_scale;
  Lattice a = to_lattice(source, mass_scale);
  Lattice b = to_lattice(target, mass_scale);
  rebalance(a, b);

  // Nodes: 0 = source, 1..n sources, n+1..n+m targets, n+m+1 = sink.
  const int src = 0;
  const int sink = static_cast<int>(n + m + 1);
  MinCostFlow mcf(static_cast<int>(n + m + 2));
  struct Cell {
    std::size_t i, j;
    int node, edge;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < n; ++i) {
    if (a.units[i] == 0) continue;
    mcf.add_edge(src, static_cast<int>(1 + i), a.units[i], 0);
    for (std::size_t j = 0; j < m; ++j) {
      if (b.units[j] == 0) continue;
      const double d = distance(i, j);
      if (!std::isfinite(d) || d < 0.0) {
        throw InvalidArgument("ground distance must be finite and non-negative");
      }
      const double scaled = d * options.cost_scale;
      if (scaled > kLatticeLimit / static_cast<double>(n + m + 2)) {
        throw InvalidArgument("ground distance too large for exact oracle");
      }
      const int node = static_cast<int>(1 + i);
      const int edge = mcf.add_edge(node, static_cast<int>(1 + n + j),
                                    std::min(a.units[i], b.units[j]), std::llround(scaled));
      cells.push_back({i, j, node, edge});
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (b.units[j] > 0) mcf.add_edge(static_cast<int>(1 + n + j), sink, b.units[j], 0);
  }

  const std::int64_t required = std::accumulate(a.units.begin(), a.units.end(), std::int64_t{0});
  const std::int64_t moved = mcf.run(src, sink);
  if (moved != required) throw Error("transportation solver failed to route all mass");

  FlowPlan plan;
  for (const Cell& cell : cells) {
    const auto& e = mcf.edge(cell.node, cell.edge);
    const std::int64_t units = mcf.reverse(e).cap;
    if (units > 0) {
      plan.flows.push_back({cell.i, cell.j, static_cast<double>(units) / mass_scale});
    }
  }
  plan.total_work = plan_work(plan.flows, distance);
  return plan;
}

FlowPlan solve_transport_row_constant(const DiscreteDistribution& source,
                                      const DiscreteDistribution& target,
                                      std::span<const double> row_cost) {
  if (row_cost.size() != source.size()) throw InvalidArgument("one cost per source bucket required");
  check_balance(source, target);
  FlowPlan plan;
  const auto& a = source.masses();
  const auto& b = target.masses();
  std::size_t j = 0;
  double room = b.empty() ? 0.0 : b[0];
  long double work = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double left = a[i];
    while (left > kBalanceTolerance && j < b.size()) {
      const double moved = std::min(left, room);
      if (moved > 0.0) {
        plan.flows.push_back({i, j, moved});
        work += static_cast<long double>(moved) * row_cost[i];
      }
      left -= moved;
      room -= moved;
      if (room <= kBalanceTolerance) {
        ++j;
        room = j < b.size() ? b[j] : 0.0;
      }
    }
  }
  plan.total_work = static_cast<double>(work);
  return plan;
}

}  // namespace webcent::emd
