#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

namespace stgf {

struct Edge {
  std::int32_t source = 0;
  std::int32_t target = 0;
  double weight = 0.0;
};

/// Weighted mobility network. Nodes are locations, edge weights are flows
/// (vehicles, people). Immutable after construction: zero-weight edges are
/// dropped, while negative weights, self-loops, out-of-range endpoints and
/// duplicate (source, target) pairs are rejected.
class MobilityGraph {
 public:
  MobilityGraph() = default;
  MobilityGraph(std::vector<std::string> node_ids, std::vector<Edge> edges,
                bool directed = true);

  std::size_t node_count() const { return node_ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::string>& node_ids() const { return node_ids_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool directed() const { return directed_; }

 private:
  std::vector<std::string> node_ids_;
  std::vector<Edge> edges_;
  bool directed_ = true;
};

enum class Direction { Out, In };

struct NodeStats {
  std::size_t out_degree = 0;
  double out_strength = 0.0;
  std::size_t in_degree = 0;
  double in_strength = 0.0;

  std::size_t degree(Direction d) const {
    return d == Direction::Out ? out_degree : in_degree;
  }
  double strength(Direction d) const {
    return d == Direction::Out ? out_strength : in_strength;
  }
};

/// Degree/strength counts for every node. For undirected graphs each edge
/// contributes to both endpoints in both directions.
std::vector<NodeStats> node_stats(const MobilityGraph& graph);

/// Stats for a single node; throws std::out_of_range on a bad index.
NodeStats node_stats(const MobilityGraph& graph, std::size_t node);

/// Probability that an edge of the given weight is compatible with a random
/// spread of the node's strength across its degree: (1 - weight/s)^(k-1).
/// Preconditions: k >= 1, 0 < weight <= s.
double disparity_pvalue(double weight, std::size_t degree, double strength);

enum class BackboneCriterion { Smallest, Largest };

/// Disparity-filter backbone. Each edge gets a p-value from the source's
/// out-stats and one from the target's in-stats, combined per the criterion;
/// edges with combined p < alpha survive. Afterwards every node's min_keep
/// heaviest outgoing edges are restored (ties broken toward the lower target
/// index), so no node loses all of its connections. Node set and surviving
/// weights are unchanged.
MobilityGraph extract_backbone(const MobilityGraph& graph, double alpha,
                               std::size_t min_keep,
                               BackboneCriterion criterion = BackboneCriterion::Smallest);

/// Symmetrically normalized adjacency with self-loops,
/// D^{-1/2} (A + I) D^{-1/2}, where D is the diagonal of row sums of A + I.
/// This is the mixing operator applied by every graph convolution.
struct PropagationMatrix {
  Eigen::SparseMatrix<double> values;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

PropagationMatrix propagation_matrix(const MobilityGraph& graph);

}  // namespace stgf
