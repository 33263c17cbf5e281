#include "igcl/backbone.hpp"

namespace igcl {

BackboneKind backbone_kind_from_string(const std::string& s) {
    if (s == "gcn" || s == "GCN") return BackboneKind::gcn;
    if (s == "gin" || s == "GIN") return BackboneKind::gin;
    throw UsageError("unknown backbone kind '" + s + "' (expected gcn or gin)");
}

ProjectionKind projection_kind_from_string(const std::string& s) {
    if (s == "linear" || s == "Linear") return ProjectionKind::linear;
    if (s == "skip" || s == "Skip") return ProjectionKind::skip;
    if (s == "mlp2") return ProjectionKind::mlp2;
    throw UsageError("unknown projection kind '" + s + "' (expected linear, skip or mlp2)");
}

std::string to_string(BackboneKind k) { return k == BackboneKind::gcn ? "gcn" : "gin"; }

std::string to_string(ProjectionKind k) {
    switch (k) {
        case ProjectionKind::linear: return "linear";
        case ProjectionKind::skip: return "skip";
        default: return "mlp2";
    }
}

void BackboneConfig::validate() const {
    if (num_layers < 1) throw UsageError("backbone: num_layers must be >= 1");
    if (emb_dim < 1) throw UsageError("backbone: emb_dim must be >= 1");
    if (dropout_p < 0.0 || dropout_p >= 1.0) throw UsageError("backbone: dropout_p in [0,1)");
}

Tensor gcn_forward(const Tensor& a_hat, const Tensor& h, const Tensor& w, bool activate) {
    Tensor out = matmul(a_hat, matmul(h, w));
    return activate ? relu(out) : out;
}

Tensor gin_forward(const Tensor& adj, const Tensor& h, const Tensor& w1, const Tensor& w2,
                   double epsilon) {
    Tensor agg = add(scale(h, 1.0 + epsilon), matmul(adj, h));
    return matmul(relu(matmul(agg, w1)), w2);
}

Tensor readout(const Tensor& h, const std::vector<std::pair<int, int>>& offsets,
               ReadoutMode mode) {
    std::vector<Tensor> rows;
    for (auto [start, end] : offsets) {
        if (start < 0 || end > h.rows() || start >= end)
            throw UsageError("readout: empty or invalid graph range");
        std::vector<int> idx;
        for (int i = start; i < end; ++i) idx.push_back(i);
        Tensor r = col_sum(gather_rows(h, idx));  // 1 x D
        if (mode == ReadoutMode::mean) r = scale(r, 1.0 / static_cast<double>(end - start));
        rows.push_back(r);
    }
    return concat_rows(rows);
}

ProjectionHead ProjectionHead::init(ProjectionKind kind, int dim, Rng& rng) {
    ProjectionHead p;
    p.kind = kind;
    p.w1 = glorot_init(dim, dim, rng);
    p.w1.set_name("proj_w1");
    if (kind == ProjectionKind::mlp2) {
        p.w2 = glorot_init(dim, dim, rng);
        p.w2.set_name("proj_w2");
    }
    return p;
}

Tensor ProjectionHead::forward(const Tensor& h) const {
    switch (kind) {
        case ProjectionKind::linear: return matmul(h, w1);
        case ProjectionKind::skip: return add(matmul(h, w1), h);
        default: return matmul(relu(matmul(h, w1)), w2);
    }
}

std::vector<Tensor> ProjectionHead::parameters() const {
    std::vector<Tensor> ps{w1};
    if (kind == ProjectionKind::mlp2) ps.push_back(w2);
    return ps;
}

Backbone::Backbone(BackboneConfig cfg, int in_dim, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    int d_in = in_dim;
    for (int l = 0; l < cfg_.num_layers; ++l) {
        const int d_out = l + 1 == cfg_.num_layers ? cfg_.emb_dim : cfg_.hidden();
        if (cfg_.kind == BackboneKind::gcn) {
            Tensor w = glorot_init(d_in, d_out, rng);
            w.set_name("gcn_w" + std::to_string(l));
            gcn_weights_.push_back(w);
        } else {
            Tensor w1 = glorot_init(d_in, d_out, rng);
            Tensor w2 = glorot_init(d_out, d_out, rng);
            w1.set_name("gin_w1_" + std::to_string(l));
            w2.set_name("gin_w2_" + std::to_string(l));
            gin_.emplace_back(w1, w2);
        }
        d_in = d_out;
    }
}

Tensor Backbone::forward(const Graph& g, const Tensor& x, Rng& rng, bool training) const {
    Tensor adj =
        cfg_.kind == BackboneKind::gcn ? normalized_adjacency(g) : dense_adjacency(g);
    Tensor h = x;
    for (int l = 0; l < cfg_.num_layers; ++l) {
        if (cfg_.dropout_p > 0.0) h = dropout(h, cfg_.dropout_p, rng, training);
        if (cfg_.kind == BackboneKind::gcn) {
            const bool activate = l + 1 < cfg_.num_layers;  // linear output layer
            h = gcn_forward(adj, h, gcn_weights_[l], activate);
        } else {
            h = gin_forward(adj, h, gin_[l].first, gin_[l].second, cfg_.gin_epsilon);
        }
    }
    return h;
}

std::vector<Tensor> Backbone::parameters() const {
    std::vector<Tensor> ps;
    for (const auto& w : gcn_weights_) ps.push_back(w);
    for (const auto& [w1, w2] : gin_) {
        ps.push_back(w1);
        ps.push_back(w2);
    }
    return ps;
}

}  // namespace igcl
