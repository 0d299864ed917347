#pragma once

#include "mcn/connectedness.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace mcn::net {

enum class Category { bond, equity };

Category parse_category(const std::string& text);
std::string category_name(Category c);

/// One moment layer of the multi-layer network. Edges are pairwise total
/// connectedness values: symmetric, nonnegative, zero diagonal.
struct MomentLayer {
    std::string name;
    std::vector<std::string> nodes;
    std::vector<Category> categories;
    Eigen::MatrixXd edges;
};

void validate_layer(const MomentLayer& layer);

/// Network density: edge mass summed over unordered pairs.
double layer_density(const Eigen::MatrixXd& edges);

struct LayerWeights {
    Eigen::VectorXd densities;
    Eigen::VectorXd weights;  // densities normalized to sum 1
};
LayerWeights layer_weights(const std::vector<MomentLayer>& layers);

/// Elementwise convex combination of the layer edge matrices.
Eigen::MatrixXd project_layers(const std::vector<MomentLayer>& layers,
                               const Eigen::VectorXd& weights);

/// Bridging score per node: mean drop in harmonic cohesion when deleting one
/// of the node's edges, rescaled so the maximum is 1. Path lengths add the
/// reciprocals of the edge weights.
Eigen::VectorXd bridge_centrality(const Eigen::MatrixXd& edges);

struct NodeMetrics {
    std::vector<std::string> nodes;
    Eigen::VectorXd degree;      // aggregated total connectedness
    Eigen::VectorXd net_degree;  // aggregated net connectedness
    Eigen::VectorXd bridge;
};

/// Degree and net degree come from the directional table behind the layer;
/// bridge centrality from the symmetric edges.
NodeMetrics node_metrics(const MomentLayer& layer, const conn::DirectionalIndices& directional);

struct MultiLayerNetwork {
    std::vector<std::string> nodes;
    std::vector<Category> categories;
    std::vector<MomentLayer> layers;
    Eigen::VectorXd densities;
    Eigen::VectorXd weights;
    MomentLayer projection;
    std::map<std::string, NodeMetrics> metrics;  // keyed by layer name and "projection"
};

/// Assembles layers, density weights, the projection layer, and node metrics.
/// `directional[k]` must match `layers[k]`; `projection_directional` is the
/// weight-combined directional table.
MultiLayerNetwork build_network(const std::vector<MomentLayer>& layers,
                                const std::vector<conn::DirectionalIndices>& directional,
                                const conn::DirectionalIndices& projection_directional);

void export_network(const std::string& path, const MultiLayerNetwork& network);
MultiLayerNetwork import_network(const std::string& path);

}  // namespace mcn::net
