#pragma once

#include <string>
#include <utility>
#include <vector>

#include "igcl/tensor.hpp"

namespace igcl {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Undirected graph. Edges are stored once as (i, j) with i < j, deduplicated,
// no self-loops; self-loops enter analytically through A~ = A + I.
struct Graph {
    int num_nodes = 0;
    std::vector<std::pair<int, int>> edges;
    Tensor features;             // N x F, optional (undefined if absent)
    std::vector<int> node_labels;  // per-node class ids, optional (empty)
    int graph_label = -1;          // whole-graph class id, -1 if absent

    int num_edges() const { return static_cast<int>(edges.size()); }
    std::vector<int> degrees() const;  // without the analytic self-loop
    bool has_edge(int i, int j) const;
    void validate() const;  // throws on invariant violation
};

struct GraphSet {
    std::vector<Graph> graphs;

    int num_graphs() const { return static_cast<int>(graphs.size()); }
    int total_nodes() const;
    // contiguous [start, end) node ranges for block-diagonal composition
    std::vector<std::pair<int, int>> offsets() const;
};

struct Split {
    std::vector<int> train, val, test;
};

// D~^{-1/2} (A + I) D~^{-1/2}, dense, symmetric
Tensor normalized_adjacency(const Graph& g);
// plain dense adjacency without self-loops (GIN aggregation)
Tensor dense_adjacency(const Graph& g);

// file formats: edge list "src,dst" per line, '#' comments; headerless CSV
std::vector<std::pair<int, int>> load_edge_list(const std::string& path, int* max_node = nullptr);
Tensor load_features_csv(const std::string& path);
std::vector<int> load_labels_csv(const std::string& path);
Graph load_graph(const std::string& edge_path, const std::string& features_path = "",
                 const std::string& labels_path = "");
// manifest JSON: { "graphs": [ {"edges": p, "features": p, "label": i}, ... ] }
GraphSet load_graphset_manifest(const std::string& manifest_path);
void save_edge_list(const Graph& g, const std::string& path);
void save_features_csv(const Tensor& x, const std::string& path);
void save_labels_csv(const std::vector<int>& labels, const std::string& path);

// one-hot of min(degree, cap)
Tensor degree_onehot_features(const Graph& g, int cap);

Graph make_graph(int num_nodes, std::vector<std::pair<int, int>> edges);

// stochastic block model with per-block mean features
Graph synth_sbm(const std::vector<int>& block_sizes, double p_in, double p_out, int feature_dim,
                double feature_shift, double noise_sd, Rng& rng);

// Zachary karate club (34 nodes, 78 edges), bundled as code
Graph karate_club();

// drops floor(ratio * |E|) edges; dropped nodes keep their row (features
// zeroed, incident edges removed) so tensor shapes stay aligned
Graph perturb_graph(const Graph& g, double edge_drop_ratio, double node_drop_ratio, Rng& rng);

Split split_nodes(int n, double train_frac, double val_frac, Rng& rng);
// balanced k folds; fold sizes differ by at most 1
std::vector<Split> kfold_indices(int n, int k, Rng& rng);

}  // namespace igcl
