#pragma once

#include <string>
#include <vector>

#include "igcl/graph.hpp"
#include "igcl/tensor.hpp"

namespace igcl {

enum class BackboneKind { gcn, gin };
enum class ProjectionKind { linear, skip, mlp2 };

BackboneKind backbone_kind_from_string(const std::string& s);
ProjectionKind projection_kind_from_string(const std::string& s);
std::string to_string(BackboneKind k);
std::string to_string(ProjectionKind k);

struct BackboneConfig {
    BackboneKind kind = BackboneKind::gcn;
    int num_layers = 2;
    int hidden_dim = 0;  // 0 means "same as emb_dim"
    int emb_dim = 64;
    double gin_epsilon = 0.0;
    double dropout_p = 0.0;

    int hidden() const { return hidden_dim > 0 ? hidden_dim : emb_dim; }
    void validate() const;
};

// one propagation step: activate ? ReLU(A_hat H W) : A_hat H W
Tensor gcn_forward(const Tensor& a_hat, const Tensor& h, const Tensor& w, bool activate);

// GIN update h_i <- MLP((1+eps) h_i + sum_{j in N(i)} h_j), 2-layer ReLU MLP
Tensor gin_forward(const Tensor& adj, const Tensor& h, const Tensor& w1, const Tensor& w2,
                   double epsilon);

enum class ReadoutMode { sum, mean };
// per-graph reduction over node rows given contiguous [start, end) ranges
Tensor readout(const Tensor& h, const std::vector<std::pair<int, int>>& offsets, ReadoutMode mode);

struct ProjectionHead {
    ProjectionKind kind = ProjectionKind::linear;
    Tensor w1, w2;  // w2 used by mlp2 only

    static ProjectionHead init(ProjectionKind kind, int dim, Rng& rng);
    Tensor forward(const Tensor& h) const;
    std::vector<Tensor> parameters() const;
};

// Stacked message-passing backbone. Dropout is applied to layer inputs
// during training.
class Backbone {
public:
    Backbone(BackboneConfig cfg, int in_dim, Rng& rng);

    // node embeddings N x emb_dim; adj is normalized (gcn) or raw (gin)
    Tensor forward(const Graph& g, const Tensor& x, Rng& rng, bool training) const;
    const BackboneConfig& config() const { return cfg_; }
    std::vector<Tensor> parameters() const;

private:
    BackboneConfig cfg_;
    std::vector<Tensor> gcn_weights_;             // per layer
    std::vector<std::pair<Tensor, Tensor>> gin_;  // per layer (w1, w2)
};

}  // namespace igcl
