#include "stgf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace stgf {

namespace {

std::uint64_t pair_key(std::int32_t a, std::int32_t b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

MobilityGraph::MobilityGraph(std::vector<std::string> node_ids, std::vector<Edge> edges,
                             bool directed)
    : node_ids_(std::move(node_ids)), directed_(directed) {
  const auto n = static_cast<std::int32_t>(node_ids_.size());
  edges_.reserve(edges.size());
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    if (e.source < 0 || e.source >= n || e.target < 0 || e.target >= n)
      throw std::invalid_argument("edge endpoint out of range: " + std::to_string(e.source) +
                                  " -> " + std::to_string(e.target));
    if (e.source == e.target)
      throw std::invalid_argument("self-loop rejected at node " + std::to_string(e.source));
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
      throw std::invalid_argument("negative or non-finite edge weight on " +
                                  std::to_string(e.source) + " -> " + std::to_string(e.target));
    if (e.weight == 0.0) continue;  // dropped, not an error
    const std::uint64_t key = directed_ ? pair_key(e.source, e.target)
                                        : pair_key(std::min(e.source, e.target),
                                                   std::max(e.source, e.target));
    if (!seen.insert(key).second)
      throw std::invalid_argument("duplicate edge " + std::to_string(e.source) + " -> " +
                                  std::to_string(e.target));
    edges_.push_back(e);
  }
}

std::vector<NodeStats> node_stats(const MobilityGraph& graph) {
  std::vector<NodeStats> stats(graph.node_count());
  for (const Edge& e : graph.edges()) {
    stats[e.source].out_degree += 1;
    stats[e.source].out_strength += e.weight;
    stats[e.target].in_degree += 1;
    stats[e.target].in_strength += e.weight;
    if (!graph.directed()) {
      stats[e.target].out_degree += 1;
      stats[e.target].out_strength += e.weight;
      stats[e.source].in_degree += 1;
      stats[e.source].in_strength += e.weight;
    }
  }
  return stats;
}

NodeStats node_stats(const MobilityGraph& graph, std::size_t node) {
  if (node >= graph.node_count())
    throw std::out_of_range("node index " + std::to_string(node) + " out of range");
  return node_stats(graph)[node];
}

double disparity_pvalue(double weight, std::size_t degree, double strength) {
  if (degree < 1) throw std::invalid_argument("disparity_pvalue: degree must be >= 1");
  if (!(weight > 0.0) || !(strength > 0.0) || weight > strength)
    throw std::invalid_argument("disparity_pvalue: requires 0 < weight <= strength");
  if (degree == 1) return 1.0;
  return std::pow(1.0 - weight / strength, static_cast<double>(degree - 1));
}

MobilityGraph extract_backbone(const MobilityGraph& graph, double alpha, std::size_t min_keep,
                               BackboneCriterion criterion) {
  if (graph.node_count() == 0) throw std::invalid_argument("extract_backbone: empty graph");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("extract_backbone: alpha must be in (0, 1)");

  const auto stats = node_stats(graph);
  const auto& edges = graph.edges();

  std::vector<char> keep(edges.size(), 0);
  for (std::size_t idx = 0; idx < edges.size(); ++idx) {
    const Edge& e = edges[idx];
    const double p_from = disparity_pvalue(e.weight, stats[e.source].out_degree,
                                           stats[e.source].out_strength);
    const double p_to =
        disparity_pvalue(e.weight, stats[e.target].in_degree, stats[e.target].in_strength);
    const double p = criterion == BackboneCriterion::Smallest ? std::min(p_from, p_to)
                                                              : std::max(p_from, p_to);
    keep[idx] = p < alpha ? 1 : 0;
  }

  // Retention: restore each node's min_keep heaviest outgoing edges.
  if (min_keep > 0) {
    std::vector<std::vector<std::size_t>> outgoing(graph.node_count());
    for (std::size_t idx = 0; idx < edges.size(); ++idx) {
      outgoing[edges[idx].source].push_back(idx);
      if (!graph.directed()) outgoing[edges[idx].target].push_back(idx);
    }
    for (auto& own : outgoing) {
      const std::size_t take = std::min(min_keep, own.size());
      std::partial_sort(own.begin(), own.begin() + static_cast<std::ptrdiff_t>(take), own.end(),
                        [&](std::size_t a, std::size_t b) {
                          if (edges[a].weight != edges[b].weight)
                            return edges[a].weight > edges[b].weight;
                          if (edges[a].target != edges[b].target)
                            return edges[a].target < edges[b].target;
                          return edges[a].source < edges[b].source;
                        });
      for (std::size_t i = 0; i < take; ++i) keep[own[i]] = 1;
    }
  }

  std::vector<Edge> kept;
  for (std::size_t idx = 0; idx < edges.size(); ++idx)
    if (keep[idx]) kept.push_back(edges[idx]);
  return MobilityGraph(graph.node_ids(), std::move(kept), graph.directed());
}

PropagationMatrix propagation_matrix(const MobilityGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  if (n == 0) throw std::invalid_argument("propagation_matrix: empty graph");

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.edge_count() * (graph.directed() ? 1 : 2) + graph.node_count());
  for (const Edge& e : graph.edges()) {
    triplets.emplace_back(e.source, e.target, e.weight);
    if (!graph.directed()) triplets.emplace_back(e.target, e.source, e.weight);
  }
  for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0);  // self-loops

  Eigen::SparseMatrix<double> a_hat(n, n);
  a_hat.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::VectorXd row_sums = a_hat * Eigen::VectorXd::Ones(n);
  Eigen::VectorXd inv_sqrt = row_sums.array().sqrt().inverse();

  PropagationMatrix out;
  out.values = inv_sqrt.asDiagonal() * a_hat * inv_sqrt.asDiagonal();
  out.values.makeCompressed();
  return out;
}

}  // namespace stgf
