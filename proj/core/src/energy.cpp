#include "colocal/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

namespace colocal {

namespace {

// Dinic's max-flow on an adjacency-list residual graph.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : head_(n), level_(n), iter_(n) {}

  // Arcs are stored in pairs so that arcs_[a ^ 1] is the reverse of arcs_[a].
  void add_edge(int from, int to, double cap_fwd, double cap_bwd) {
    arcs_.push_back({to, cap_fwd});
    head_[from].push_back(static_cast<int>(arcs_.size()) - 1);
    arcs_.push_back({from, cap_bwd});
    head_[to].push_back(static_cast<int>(arcs_.size()) - 1);
  }

  double run(int source, int sink) {
    double total = 0.0;
    while (bfs(source, sink)) {
      std::fill(iter_.begin(), iter_.end(), 0);
      for (;;) {
        double f = dfs(source, sink, std::numeric_limits<double>::infinity());
        if (f <= 0.0) break;
        total += f;
      }
    }
    return total;
  }

  // After run(): true iff v is reachable from source in the residual graph.
  std::vector<char> source_side(int source) const {
    std::vector<char> seen(head_.size(), 0);
    std::queue<int> q;
    q.push(source);
    seen[source] = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int a : head_[u]) {
        const Arc& arc = arcs_[a];
        if (arc.cap > 0.0 && !seen[arc.to]) {
          seen[arc.to] = 1;
          q.push(arc.to);
        }
      }
    }
    return seen;
  }

 private:
  struct Arc {
    int to;
    double cap;
  };

  bool bfs(int source, int sink) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[source] = 0;
    q.push(source);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int a : head_[u]) {
        const Arc& arc = arcs_[a];
        if (arc.cap > 0.0 && level_[arc.to] < 0) {
          level_[arc.to] = level_[u] + 1;
          q.push(arc.to);
        }
      }
    }
    return level_[sink] >= 0;
  }

  double dfs(int u, int sink, double pushed) {
    if (u == sink) return pushed;
    for (int& i = iter_[u]; i < static_cast<int>(head_[u].size()); ++i) {
      int a = head_[u][i];
      Arc& arc = arcs_[a];
      if (arc.cap > 0.0 && level_[arc.to] == level_[u] + 1) {
        double f = dfs(arc.to, sink, std::min(pushed, arc.cap));
        if (f > 0.0) {
          arc.cap -= f;
          arcs_[a ^ 1].cap += f;
          return f;
        }
      }
    }
    return 0.0;
  }

  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> head_;
  std::vector<int> level_;
  std::vector<int> iter_;
};

}  // namespace

std::vector<UnaryCost> unary_potentials(const std::vector<Superpixel>& nodes,
                                        const HeatMap& heat,
                                        double clamp_delta) {
  if (!(clamp_delta > 0.0 && clamp_delta < 0.5))
    throw ValidationError("unary_potentials: clamp_delta must lie in (0, 0.5)");
  std::vector<UnaryCost> out;
  out.reserve(nodes.size());
  for (const Superpixel& sp : nodes) {
    if (sp.members.empty())
      throw ValidationError("unary_potentials: empty superpixel " +
                            std::to_string(sp.id));
    double sum = 0.0;
    for (auto [x, y] : sp.members)
      sum += heat.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
    double h = sum / static_cast<double>(sp.members.size());
    h = std::clamp(h, clamp_delta, 1.0 - clamp_delta);
    out.push_back({-std::log(1.0 - h), -std::log(h)});
  }
  return out;
}

std::vector<WeightedEdge> pairwise_weights(const std::vector<Superpixel>& nodes,
                                           const SuperpixelGraph& graph,
                                           double beta) {
  if (beta < 0.0)
    throw ValidationError("pairwise_weights: beta must be nonnegative");
  std::vector<WeightedEdge> out;
  out.reserve(graph.edges.size());
  for (auto [a, b] : graph.edges) {
    const std::vector<double>& ca = nodes[a].histogram;
    const std::vector<double>& cb = nodes[b].histogram;
    if (ca.size() != cb.size())
      throw ValidationError("pairwise_weights: histogram size mismatch");
    double d2 = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) {
      double d = ca[i] - cb[i];
      d2 += d * d;
    }
    out.push_back({a, b, std::exp(-beta * d2)});
  }
  return out;
}

double energy_of(const EnergyModel& model, const std::vector<int>& labels) {
  if (labels.size() != model.unary.size())
    throw ValidationError("energy_of: label count does not match node count");
  double e = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    e += labels[i] ? model.unary[i].cost1 : model.unary[i].cost0;
  for (const WeightedEdge& edge : model.pairwise)
    if (labels[edge.a] != labels[edge.b]) e += edge.weight;
  return e;
}

LabelAssignment min_cut_segment(const EnergyModel& model) {
  const int n = static_cast<int>(model.unary.size());
  for (const UnaryCost& u : model.unary)
    if (!std::isfinite(u.cost0) || !std::isfinite(u.cost1))
      throw ValidationError("min_cut_segment: non-finite unary cost");
  for (const WeightedEdge& e : model.pairwise) {
    if (e.weight < 0.0)
      throw ValidationError("min_cut_segment: negative pairwise weight (edge " +
                            std::to_string(e.a) + "-" + std::to_string(e.b) +
                            ")");
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n || e.a == e.b)
      throw ValidationError("min_cut_segment: invalid edge endpoints");
  }

  const int source = n;
  const int sink = n + 1;
  MaxFlow flow(n + 2);
  for (int i = 0; i < n; ++i) {
    flow.add_edge(source, i, model.unary[i].cost0, 0.0);
    flow.add_edge(i, sink, model.unary[i].cost1, 0.0);
  }
  for (const WeightedEdge& e : model.pairwise)
    flow.add_edge(e.a, e.b, e.weight, e.weight);

  flow.run(source, sink);
  std::vector<char> on_source = flow.source_side(source);

  LabelAssignment out;
  out.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.labels[i] = on_source[i] ? 1 : 0;
  out.energy = energy_of(model, out.labels);
  return out;
}

}  // namespace colocal
