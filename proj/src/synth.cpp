#include <cmath>
#include <stdexcept>

#include "stgf/ingest.hpp"
#include "stgf/rng.hpp"

namespace stgf {

const char* to_string(GraphStyle s) {
  switch (s) {
    case GraphStyle::Ring: return "ring";
    case GraphStyle::Community: return "community";
    default: return "random";
  }
}

const char* to_string(SeriesStyle s) {
  switch (s) {
    case SeriesStyle::Seasonal: return "seasonal";
    case SeriesStyle::Linear: return "linear";
    default: return "separable-two-class";
  }
}

GraphStyle parse_graph_style(const std::string& name) {
  if (name == "ring") return GraphStyle::Ring;
  if (name == "community") return GraphStyle::Community;
  if (name == "random") return GraphStyle::Random;
  throw std::invalid_argument("unknown graph style: " + name);
}

SeriesStyle parse_series_style(const std::string& name) {
  if (name == "seasonal") return SeriesStyle::Seasonal;
  if (name == "linear") return SeriesStyle::Linear;
  if (name == "separable-two-class") return SeriesStyle::SeparableTwoClass;
  throw std::invalid_argument("unknown series style: " + name);
}

namespace {

constexpr Eigen::Index kCommunitySize = 5;
constexpr double kTwoPi = 6.283185307179586476925286766559;

MobilityGraph make_graph(const SynthSpec& spec, Rng& rng) {
  const Eigen::Index n = spec.nodes;
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));

  std::vector<Edge> edges;
  auto add = [&](Eigen::Index s, Eigen::Index t, double w) {
    edges.push_back({static_cast<std::int32_t>(s), static_cast<std::int32_t>(t), w});
  };

  switch (spec.graph_style) {
    case GraphStyle::Ring:
      if (n >= 2) {
        for (Eigen::Index i = 0; i < n; ++i) {
          add(i, (i + 1) % n, rng.uniform(5.0, 15.0));
          if (n > 2) add(i, (i + n - 1) % n, rng.uniform(5.0, 15.0));
        }
      }
      break;
    case GraphStyle::Community:
      // Heavy edges inside blocks of kCommunitySize nodes, one light edge per
      // node into the next block. The weight contrast is what the backbone
      // filter keys on.
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index block = i / kCommunitySize;
        const Eigen::Index lo = block * kCommunitySize;
        const Eigen::Index hi = std::min(lo + kCommunitySize, n);
        for (Eigen::Index j = lo; j < hi; ++j) {
          if (j != i) add(i, j, rng.uniform(15.0, 25.0));
        }
        const Eigen::Index blocks = (n + kCommunitySize - 1) / kCommunitySize;
        if (blocks > 1) {
          const Eigen::Index next_lo = ((block + 1) % blocks) * kCommunitySize;
          const Eigen::Index next_hi = std::min(next_lo + kCommunitySize, n);
          const Eigen::Index target = next_lo + static_cast<Eigen::Index>(rng.uniform_index(
                                                    static_cast<std::uint64_t>(next_hi - next_lo)));
          if (target != i) add(i, target, rng.uniform(0.5, 1.5));
        }
      }
      break;
    case GraphStyle::Random:
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (i != j && rng.uniform01() < 0.3) add(i, j, rng.uniform(1.0, 10.0));
        }
      }
      break;
  }
  return MobilityGraph(std::move(ids), std::move(edges), true);
}

/// Group index that ties a node's series to its graph neighborhood: the
/// community block for community graphs, the node itself for rings, a single
/// shared group otherwise.
Eigen::Index group_of(const SynthSpec& spec, Eigen::Index node) {
  switch (spec.graph_style) {
    case GraphStyle::Community: return node / kCommunitySize;
    case GraphStyle::Ring: return node;
    default: return 0;
  }
}

Eigen::Index group_count(const SynthSpec& spec) {
  switch (spec.graph_style) {
    case GraphStyle::Community: return (spec.nodes + kCommunitySize - 1) / kCommunitySize;
    case GraphStyle::Ring: return spec.nodes;
    default: return 1;
  }
}

void fill_seasonal(const SynthSpec& spec, Eigen::MatrixXd& values, Rng& rng) {
  constexpr Eigen::Index period = 35;
  constexpr double base = 20.0;
  constexpr double amplitude = 8.0;
  const double groups = static_cast<double>(group_count(spec));
  for (Eigen::Index i = 0; i < spec.nodes; ++i) {
    const double phase = kTwoPi * static_cast<double>(group_of(spec, i)) / groups;
    for (Eigen::Index t = 0; t < spec.days; ++t) {
      const double angle = kTwoPi * static_cast<double>(t % period) / static_cast<double>(period);
      values(i, t) = base + amplitude * portable_sin(angle + phase) +
                     spec.noise * rng.normalish();
    }
  }
}

void fill_linear(const SynthSpec& spec, Eigen::MatrixXd& values, Rng& rng) {
  for (Eigen::Index i = 0; i < spec.nodes; ++i) {
    const double intercept = rng.uniform(5.0, 10.0);
    const double slope = rng.uniform(0.1, 0.5);
    for (Eigen::Index t = 0; t < spec.days; ++t) {
      values(i, t) = intercept + slope * static_cast<double>(t) + spec.noise * rng.normalish();
    }
  }
}

/// Triangle waves with jittered cycle lengths: each cycle rises at rate 2
/// for a half-length drawn fresh from [12, 28] days, then falls back at the
/// same rate. With population 100,000 the alert metric is the 7-day moving
/// average times its trend, far above 10 on rises and negative on falls, so
/// recent labels are readable off a short window, while the undisclosed apex
/// of the cycle in progress keeps far-ahead labels genuinely uncertain.
void fill_two_class(const SynthSpec& spec, Eigen::MatrixXd& values, Rng& rng) {
  constexpr double low = 15.0;
  constexpr double rate = 2.0;
  const auto draw_half = [&rng] {
    return 12 + static_cast<Eigen::Index>(rng.uniform_index(17));
  };
  for (Eigen::Index i = 0; i < spec.nodes; ++i) {
    Eigen::Index half = draw_half();
    auto pos = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(2 * half)));
    for (Eigen::Index t = 0; t < spec.days; ++t) {
      const double tri = pos < half ? rate * static_cast<double>(pos)
                                    : rate * static_cast<double>(2 * half - pos);
      values(i, t) = low + tri + spec.noise * rng.normalish();
      ++pos;
      if (pos == 2 * half) {
        pos = 0;
        half = draw_half();
      }
    }
  }
}

}  // namespace

SyntheticData generate_synthetic(const SynthSpec& spec) {
  if (spec.nodes < 1 || spec.days < 1) {
    throw std::invalid_argument("synthetic spec needs at least one node and one day");
  }
  if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) {
    throw std::invalid_argument("synthetic noise level must be finite and non-negative");
  }

  Rng rng(spec.seed);
  SyntheticData data;
  data.graph = make_graph(spec, rng);

  data.panel.node_ids = data.graph.node_ids();
  data.panel.start_day = "2020-01-01";
  data.panel.values.resize(spec.nodes, spec.days);
  switch (spec.series_style) {
    case SeriesStyle::Seasonal: fill_seasonal(spec, data.panel.values, rng); break;
    case SeriesStyle::Linear: fill_linear(spec, data.panel.values, rng); break;
    case SeriesStyle::SeparableTwoClass: fill_two_class(spec, data.panel.values, rng); break;
  }

  data.populations.node_ids = data.graph.node_ids();
  data.populations.population.assign(static_cast<std::size_t>(spec.nodes), 100000.0);
  return data;
}

}  // namespace stgf
