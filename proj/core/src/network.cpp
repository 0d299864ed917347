#include "mcn/network.hpp"

#include "mcn/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace mcn::net {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// All-pairs shortest paths over reciprocal-weight edge lengths.
Eigen::MatrixXd shortest_paths(const Eigen::MatrixXd& edges) {
    const auto n = edges.rows();
    Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(n, n, kInf);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist(i, i) = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j && edges(i, j) > 0) dist(i, j) = 1.0 / edges(i, j);
        }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (dist(i, k) == kInf) continue;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double via = dist(i, k) + dist(k, j);
                if (via < dist(i, j)) dist(i, j) = via;
            }
        }
    }
    return dist;
}

// Mean over ordered pairs of inverse distances; unreachable pairs count 0.
double cohesion(const Eigen::MatrixXd& edges) {
    const auto n = edges.rows();
    const Eigen::MatrixXd dist = shortest_paths(edges);
    double acc = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j && dist(i, j) < kInf && dist(i, j) > 0) acc += 1.0 / dist(i, j);
        }
    }
    return acc / static_cast<double>(n * (n - 1));
}

}  // namespace

Category parse_category(const std::string& text) {
    if (text == "bond") return Category::bond;
    if (text == "equity") return Category::equity;
    throw data_error("unknown node category: '" + text + "'");
}

std::string category_name(Category c) { return c == Category::bond ? "bond" : "equity"; }

void validate_layer(const MomentLayer& layer) {
    const auto n = layer.edges.rows();
    if (layer.edges.cols() != n) throw data_error("layer '" + layer.name + "': edges not square");
    if (static_cast<Eigen::Index>(layer.nodes.size()) != n ||
        static_cast<Eigen::Index>(layer.categories.size()) != n)
        throw data_error("layer '" + layer.name + "': node metadata size mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (layer.edges(i, i) != 0.0)
            throw data_error("layer '" + layer.name + "': nonzero diagonal");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (layer.edges(i, j) < 0) throw data_error("layer '" + layer.name + "': negative edge");
            if (std::abs(layer.edges(i, j) - layer.edges(j, i)) > 1e-9 * (1.0 + std::abs(layer.edges(i, j))))
                throw data_error("layer '" + layer.name + "': asymmetric edges");
        }
    }
}

double layer_density(const Eigen::MatrixXd& edges) {
    double acc = 0;
    for (Eigen::Index i = 0; i < edges.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < edges.cols(); ++j) acc += edges(i, j);
    }
    return acc;
}

LayerWeights layer_weights(const std::vector<MomentLayer>& layers) {
    if (layers.empty()) throw data_error("layer_weights: no layers");
    LayerWeights w;
    w.densities.resize(static_cast<Eigen::Index>(layers.size()));
    for (size_t l = 0; l < layers.size(); ++l)
        w.densities(static_cast<Eigen::Index>(l)) = layer_density(layers[l].edges);
    const double total = w.densities.sum();
    if (!(total > 0)) throw data_error("layer_weights: all layers have zero density");
    w.weights = w.densities / total;
    return w;
}

Eigen::MatrixXd project_layers(const std::vector<MomentLayer>& layers,
                               const Eigen::VectorXd& weights) {
    if (layers.empty() || weights.size() != static_cast<Eigen::Index>(layers.size()))
        throw data_error("project_layers: layers/weights size mismatch");
    Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(layers[0].edges.rows(), layers[0].edges.cols());
    for (size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].edges.rows() != proj.rows() || layers[l].edges.cols() != proj.cols())
            throw data_error("project_layers: layer dimension mismatch");
        proj += weights(static_cast<Eigen::Index>(l)) * layers[l].edges;
    }
    return proj;
}

Eigen::VectorXd bridge_centrality(const Eigen::MatrixXd& edges) {
    const auto n = edges.rows();
    if (n < 3) throw data_error("bridge_centrality: undefined on fewer than 3 nodes");

    const double base = cohesion(edges);
    Eigen::VectorXd sum_delta = Eigen::VectorXd::Zero(n);
    Eigen::VectorXi incident = Eigen::VectorXi::Zero(n);
    Eigen::MatrixXd work = edges;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (!(edges(i, j) > 0)) continue;
            work(i, j) = work(j, i) = 0.0;
            const double delta = base - cohesion(work);
            work(i, j) = edges(i, j);
            work(j, i) = edges(j, i);
            sum_delta(i) += delta;
            sum_delta(j) += delta;
            incident(i) += 1;
            incident(j) += 1;
        }
    }

    Eigen::VectorXd score = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (incident(i) > 0) score(i) = sum_delta(i) / incident(i);
    }
    const double peak = score.maxCoeff();
    if (peak > 0) score /= peak;
    return score;
}

NodeMetrics node_metrics(const MomentLayer& layer, const conn::DirectionalIndices& directional) {
    const auto n = static_cast<Eigen::Index>(layer.nodes.size());
    if (directional.total.size() != n || directional.net.size() != n)
        throw data_error("node_metrics: node set mismatch between layer and directional indices");
    NodeMetrics m;
    m.nodes = layer.nodes;
    m.degree = directional.total;
    m.net_degree = directional.net;
    m.bridge = bridge_centrality(layer.edges);
    return m;
}

MultiLayerNetwork build_network(const std::vector<MomentLayer>& layers,
                                const std::vector<conn::DirectionalIndices>& directional,
                                const conn::DirectionalIndices& projection_directional) {
    if (layers.empty()) throw data_error("build_network: no layers");
    if (directional.size() != layers.size())
        throw data_error("build_network: directional indices size mismatch");
    for (const auto& layer : layers) {
        validate_layer(layer);
        if (layer.nodes != layers[0].nodes)
            throw data_error("build_network: layers disagree on node set");
    }

    MultiLayerNetwork net;
    net.nodes = layers[0].nodes;
    net.categories = layers[0].categories;
    net.layers = layers;
    const LayerWeights lw = layer_weights(layers);
    net.densities = lw.densities;
    net.weights = lw.weights;

    net.projection.name = "projection";
    net.projection.nodes = net.nodes;
    net.projection.categories = net.categories;
    net.projection.edges = project_layers(layers, lw.weights);

    for (size_t l = 0; l < layers.size(); ++l)
        net.metrics[layers[l].name] = node_metrics(layers[l], directional[l]);
    net.metrics["projection"] = node_metrics(net.projection, projection_directional);
    return net;
}

namespace {

json layer_to_json(const MomentLayer& layer, double weight, double density) {
    json edges = json::array();
    struct Edge {
        std::string source, target;
        double weight;
    };
    std::vector<Edge> list;
    for (Eigen::Index i = 0; i < layer.edges.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < layer.edges.cols(); ++j) {
            if (!(layer.edges(i, j) > 0)) continue;
            Edge e{layer.nodes[static_cast<size_t>(i)], layer.nodes[static_cast<size_t>(j)],
                   layer.edges(i, j)};
            if (e.target < e.source) std::swap(e.source, e.target);
            list.push_back(std::move(e));
        }
    }
    std::sort(list.begin(), list.end(), [](const Edge& a, const Edge& b) {
        return a.source != b.source ? a.source < b.source : a.target < b.target;
    });
    for (const auto& e : list)
        edges.push_back({{"source", e.source}, {"target", e.target}, {"weight", e.weight}});
    return json{{"name", layer.name}, {"weight", weight}, {"density", density}, {"edges", edges}};
}

MomentLayer layer_from_json(const json& j, const std::vector<std::string>& nodes,
                            const std::vector<Category>& categories) {
    MomentLayer layer;
    layer.name = j.at("name").get<std::string>();
    layer.nodes = nodes;
    layer.categories = categories;
    const auto n = static_cast<Eigen::Index>(nodes.size());
    layer.edges = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : j.at("edges")) {
        const auto s = std::find(nodes.begin(), nodes.end(), e.at("source").get<std::string>());
        const auto t = std::find(nodes.begin(), nodes.end(), e.at("target").get<std::string>());
        if (s == nodes.end() || t == nodes.end())
            throw data_error("network import: edge references unknown node");
        const auto i = static_cast<Eigen::Index>(s - nodes.begin());
        const auto k = static_cast<Eigen::Index>(t - nodes.begin());
        layer.edges(i, k) = layer.edges(k, i) = e.at("weight").get<double>();
    }
    return layer;
}

}  // namespace

void export_network(const std::string& path, const MultiLayerNetwork& network) {
    json doc;
    doc["nodes"] = json::array();
    for (size_t i = 0; i < network.nodes.size(); ++i) {
        doc["nodes"].push_back(
            {{"id", network.nodes[i]}, {"category", category_name(network.categories[i])}});
    }
    doc["layers"] = json::array();
    for (size_t l = 0; l < network.layers.size(); ++l) {
        doc["layers"].push_back(layer_to_json(network.layers[l],
                                              network.weights(static_cast<Eigen::Index>(l)),
                                              network.densities(static_cast<Eigen::Index>(l))));
    }
    doc["projection"] =
        layer_to_json(network.projection, 1.0, layer_density(network.projection.edges));
    doc["metrics"] = json::object();
    for (const auto& [name, metrics] : network.metrics) {
        json rows = json::array();
        for (size_t i = 0; i < metrics.nodes.size(); ++i) {
            rows.push_back({{"id", metrics.nodes[i]},
                            {"degree", metrics.degree(static_cast<Eigen::Index>(i))},
                            {"net_degree", metrics.net_degree(static_cast<Eigen::Index>(i))},
                            {"bridge", metrics.bridge(static_cast<Eigen::Index>(i))}});
        }
        doc["metrics"][name] = rows;
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open output file: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw data_error("write failed: " + path);
}

MultiLayerNetwork import_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open network file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw data_error(path + ": " + e.what());
    }

    MultiLayerNetwork net;
    for (const auto& node : doc.at("nodes")) {
        net.nodes.push_back(node.at("id").get<std::string>());
        net.categories.push_back(parse_category(node.at("category").get<std::string>()));
    }
    const auto layer_count = doc.at("layers").size();
    net.densities.resize(static_cast<Eigen::Index>(layer_count));
    net.weights.resize(static_cast<Eigen::Index>(layer_count));
    for (size_t l = 0; l < layer_count; ++l) {
        const auto& jl = doc.at("layers")[l];
        net.layers.push_back(layer_from_json(jl, net.nodes, net.categories));
        net.weights(static_cast<Eigen::Index>(l)) = jl.at("weight").get<double>();
        net.densities(static_cast<Eigen::Index>(l)) = jl.at("density").get<double>();
    }
    net.projection = layer_from_json(doc.at("projection"), net.nodes, net.categories);

    for (const auto& [name, rows] : doc.at("metrics").items()) {
        NodeMetrics m;
        const auto n = static_cast<Eigen::Index>(rows.size());
        m.degree.resize(n);
        m.net_degree.resize(n);
        m.bridge.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& row = rows[static_cast<size_t>(i)];
            m.nodes.push_back(row.at("id").get<std::string>());
            m.degree(i) = row.at("degree").get<double>();
            m.net_degree(i) = row.at("net_degree").get<double>();
            m.bridge(i) = row.at("bridge").get<double>();
        }
        net.metrics[name] = std::move(m);
    }
    return net;
}

}  // namespace mcn::net
