#include "igcl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace igcl {

std::vector<int> Graph::degrees() const {
    std::vector<int> deg(num_nodes, 0);
    for (auto [i, j] : edges) {
        deg[i] += 1;
        deg[j] += 1;
    }
    return deg;
}

bool Graph::has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
}

void Graph::validate() const {
    for (auto [i, j] : edges) {
        if (i < 0 || j < 0 || i >= num_nodes || j >= num_nodes)
            throw UsageError("graph: edge endpoint out of range");
        if (i == j) throw UsageError("graph: self-loop stored");
        if (i > j) throw UsageError("graph: edge not in canonical (i<j) order");
    }
    for (std::size_t e = 1; e < edges.size(); ++e)
        if (edges[e - 1] >= edges[e]) throw UsageError("graph: duplicate or unsorted edge");
    if (features.defined() && features.rows() != num_nodes)
        throw UsageError("graph: feature row count differs from num_nodes");
    if (!node_labels.empty() && static_cast<int>(node_labels.size()) != num_nodes)
        throw UsageError("graph: label count differs from num_nodes");
}

Graph make_graph(int num_nodes, std::vector<std::pair<int, int>> edges) {
    Graph g;
    g.num_nodes = num_nodes;
    for (auto& [i, j] : edges)
        if (i > j) std::swap(i, j);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    g.validate();
    return g;
}

int GraphSet::total_nodes() const {
    int n = 0;
    for (const auto& g : graphs) n += g.num_nodes;
    return n;
}

std::vector<std::pair<int, int>> GraphSet::offsets() const {
    std::vector<std::pair<int, int>> out;
    int start = 0;
    for (const auto& g : graphs) {
        out.emplace_back(start, start + g.num_nodes);
        start += g.num_nodes;
    }
    return out;
}

Tensor normalized_adjacency(const Graph& g) {
    const int n = g.num_nodes;
    Tensor a(n, n);
    for (auto [i, j] : g.edges) {
        a.at(i, j) = 1.0;
        a.at(j, i) = 1.0;
    }
    for (int i = 0; i < n; ++i) a.at(i, i) = 1.0;  // A~ = A + I
    std::vector<double> dinv(n);
    for (int i = 0; i < n; ++i) {
        double d = 0.0;
        for (int j = 0; j < n; ++j) d += a.at(i, j);
        dinv[i] = 1.0 / std::sqrt(d);  // D~_ii >= 1
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a.at(i, j) *= dinv[i] * dinv[j];
    return a;
}

Tensor dense_adjacency(const Graph& g) {
    Tensor a(g.num_nodes, g.num_nodes);
    for (auto [i, j] : g.edges) {
        a.at(i, j) = 1.0;
        a.at(j, i) = 1.0;
    }
    return a;
}

// --- loaders --------------------------------------------------------------

static std::string line_msg(const std::string& path, int line, const std::string& what) {
    return path + ":" + std::to_string(line) + ": " + what;
}

std::vector<std::pair<int, int>> load_edge_list(const std::string& path, int* max_node) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open edge list: " + path);
    std::vector<std::pair<int, int>> edges;
    std::string line;
    int line_no = 0;
    int mx = -1;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // trim
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(line_msg(path, line_no, "expected 'src,dst'"));
        long i, j;
        try {
            i = std::stol(line.substr(0, comma));
            j = std::stol(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw ParseError(line_msg(path, line_no, "non-numeric node id"));
        }
        if (i < 0 || j < 0) throw ParseError(line_msg(path, line_no, "negative node id"));
        if (i == j) throw ParseError(line_msg(path, line_no, "self-loop rejected"));
        int a = static_cast<int>(i), b = static_cast<int>(j);
        if (a > b) std::swap(a, b);
        edges.emplace_back(a, b);
        mx = std::max(mx, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (max_node) *max_node = mx;
    return edges;
}

Tensor load_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open features csv: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(tok, &pos));
                while (pos < tok.size() && tok[pos] == ' ') ++pos;
                if (pos != tok.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ParseError(line_msg(path, line_no, "non-numeric token '" + tok + "'"));
            }
        }
        if (!rows.empty() && row.size() != rows[0].size())
            throw ParseError(line_msg(path, line_no, "ragged row"));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": empty feature file");
    return Tensor::from_rows(rows);
}

std::vector<int> load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open labels csv: " + path);
    std::vector<int> labels;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        try {
            labels.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw ParseError(line_msg(path, line_no, "non-integer label '" + line + "'"));
        }
    }
    return labels;
}

Graph load_graph(const std::string& edge_path, const std::string& features_path,
                 const std::string& labels_path) {
    int max_node = -1;
    auto edges = load_edge_list(edge_path, &max_node);
    Graph g;
    if (!features_path.empty()) {
        g.features = load_features_csv(features_path);
        g.num_nodes = g.features.rows();
        if (max_node >= g.num_nodes)
            throw ParseError(edge_path + ": edge endpoint beyond feature rows");
    } else {
        g.num_nodes = max_node + 1;
    }
    g.edges = std::move(edges);
    if (!labels_path.empty()) {
        g.node_labels = load_labels_csv(labels_path);
        if (static_cast<int>(g.node_labels.size()) != g.num_nodes)
            throw ParseError(labels_path + ": label count differs from node count");
    }
    g.validate();
    return g;
}

GraphSet load_graphset_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ParseError("cannot open manifest: " + manifest_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(manifest_path + ": " + e.what());
    }
    if (!j.contains("graphs") || !j["graphs"].is_array())
        throw ParseError(manifest_path + ": missing 'graphs' array");
    GraphSet gs;
    for (const auto& entry : j["graphs"]) {
        std::string edges = entry.value("edges", "");
        if (edges.empty()) throw ParseError(manifest_path + ": graph entry without 'edges'");
        std::string feats = entry.value("features", "");
        Graph g = load_graph(edges, feats);
        g.graph_label = entry.value("label", -1);
        gs.graphs.push_back(std::move(g));
    }
    return gs;
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write edge list: " + path);
    out << "# nodes=" << g.num_nodes << "\n";
    for (auto [i, j] : g.edges) out << i << "," << j << "\n";
}

void save_features_csv(const Tensor& x, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write features csv: " + path);
    char buf[32];
    for (int i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < x.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", x.at(i, j));
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
}

void save_labels_csv(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write labels csv: " + path);
    for (int l : labels) out << l << "\n";
}

// --- features / generators ------------------------------------------------

Tensor degree_onehot_features(const Graph& g, int cap) {
    if (cap < 1) throw UsageError("degree_onehot_features: cap must be >= 1");
    Tensor x(g.num_nodes, cap + 1);
    auto deg = g.degrees();
    for (int i = 0; i < g.num_nodes; ++i) x.at(i, std::min(deg[i], cap)) = 1.0;
    return x;
}

Graph synth_sbm(const std::vector<int>& block_sizes, double p_in, double p_out, int feature_dim,
                double feature_shift, double noise_sd, Rng& rng) {
    if (block_sizes.empty()) throw UsageError("synth_sbm: no blocks");
    for (int b : block_sizes)
        if (b <= 0) throw UsageError("synth_sbm: empty block");
    if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0))
        throw UsageError("synth_sbm: need 0 <= p_out <= p_in <= 1");
    if (feature_dim < 1) throw UsageError("synth_sbm: feature_dim must be >= 1");

    int n = 0;
    std::vector<int> block_of;
    for (std::size_t b = 0; b < block_sizes.size(); ++b) {
        n += block_sizes[b];
        block_of.insert(block_of.end(), block_sizes[b], static_cast<int>(b));
    }
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double p = block_of[i] == block_of[j] ? p_in : p_out;
            if (rng.uniform() < p) edges.emplace_back(i, j);
        }
    Graph g = make_graph(n, std::move(edges));
    g.features = Tensor(n, feature_dim);
    for (int i = 0; i < n; ++i) {
        const int mean_dim = block_of[i] % feature_dim;
        for (int d = 0; d < feature_dim; ++d) {
            double mean = d == mean_dim ? feature_shift : 0.0;
            g.features.at(i, d) = mean + noise_sd * rng.normal();
        }
    }
    g.node_labels = block_of;
    return g;
}

Graph karate_club() {
    // Zachary's karate club, zero-based
    static const int raw[][2] = {
        {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},
        {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},
        {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},  {1, 19},  {1, 21},  {1, 30},
        {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},  {2, 28},  {2, 32},
        {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
        {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33},
        {15, 32}, {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
        {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25}, {24, 27},
        {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31}, {28, 33}, {29, 32},
        {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33}};
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : raw) edges.emplace_back(e[0], e[1]);
    Graph g = make_graph(34, std::move(edges));
    // community labels from the canonical split (Mr. Hi vs Officer)
    static const int labels[34] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0,
                                   0, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    g.node_labels.assign(labels, labels + 34);
    return g;
}

Graph perturb_graph(const Graph& g, double edge_drop_ratio, double node_drop_ratio, Rng& rng) {
    if (edge_drop_ratio < 0 || edge_drop_ratio > 1 || node_drop_ratio < 0 || node_drop_ratio > 1)
        throw UsageError("perturb_graph: ratios must be in [0, 1]");
    Graph out = g;
    // drop nodes first: incident edges removed, feature rows zeroed
    const int node_drops = static_cast<int>(std::floor(node_drop_ratio * g.num_nodes));
    std::set<int> dropped;
    while (static_cast<int>(dropped.size()) < node_drops)
        dropped.insert(static_cast<int>(rng.below(g.num_nodes)));
    if (!dropped.empty()) {
        std::vector<std::pair<int, int>> kept;
        for (auto [i, j] : out.edges)
            if (!dropped.count(i) && !dropped.count(j)) kept.emplace_back(i, j);
        out.edges = std::move(kept);
        if (out.features.defined()) {
            out.features = out.features.detach();
            for (int i : dropped)
                for (int c = 0; c < out.features.cols(); ++c) out.features.at(i, c) = 0.0;
        }
    }
    const int edge_drops =
        static_cast<int>(std::floor(edge_drop_ratio * static_cast<double>(g.num_edges())));
    // uniform removal without replacement (partial Fisher-Yates)
    int keep = static_cast<int>(out.edges.size());
    for (int k = 0; k < edge_drops && keep > 0; ++k) {
        int pick = static_cast<int>(rng.below(keep));
        std::swap(out.edges[pick], out.edges[keep - 1]);
        --keep;
    }
    out.edges.resize(keep);
    std::sort(out.edges.begin(), out.edges.end());
    out.validate();
    return out;
}

Split split_nodes(int n, double train_frac, double val_frac, Rng& rng) {
    if (train_frac + val_frac > 1.0 + 1e-12) throw UsageError("split_nodes: fractions sum > 1");
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.below(static_cast<uint64_t>(i) + 1)]);
    Split s;
    const int n_train = static_cast<int>(std::floor(train_frac * n));
    const int n_val = static_cast<int>(std::floor(val_frac * n));
    s.train.assign(idx.begin(), idx.begin() + n_train);
    s.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
    s.test.assign(idx.begin() + n_train + n_val, idx.end());
    return s;
}

std::vector<Split> kfold_indices(int n, int k, Rng& rng) {
    if (k < 2) throw UsageError("kfold_indices: k must be >= 2");
    if (k > n) throw UsageError("kfold_indices: k exceeds population");
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.below(static_cast<uint64_t>(i) + 1)]);
    std::vector<Split> folds(k);
    // sizes differ by at most 1: first (n % k) folds get the extra element
    int pos = 0;
    for (int f = 0; f < k; ++f) {
        int sz = n / k + (f < n % k ? 1 : 0);
        folds[f].test.assign(idx.begin() + pos, idx.begin() + pos + sz);
        pos += sz;
    }
    for (int f = 0; f < k; ++f) {
        for (int o = 0; o < k; ++o)
            if (o != f)
                folds[f].train.insert(folds[f].train.end(), folds[o].test.begin(),
                                      folds[o].test.end());
    }
    return folds;
}

}  // namespace igcl
