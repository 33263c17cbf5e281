#pragma once

#include <vector>

#include "igcl/graph.hpp"
#include "igcl/tensor.hpp"

namespace igcl {

// 2-layer GCN encoder with the first layer shared between the mean and
// log-variance heads, inner-product decoder.
struct VgaeParams {
    Tensor w_shared;  // F x H
    Tensor w_mu;      // H x D
    Tensor w_sigma;   // H x D

    static VgaeParams init(int in_dim, int hidden_dim, int latent_dim, Rng& rng);
    std::vector<Tensor> parameters() const { return {w_shared, w_mu, w_sigma}; }
};

struct LatentDistribution {
    Tensor mu;         // N x D
    Tensor log_sigma;  // N x D

    // sigma values after the [-30, 10] clamp, detached
    Tensor sigma_detached() const;
};

struct GraphLatent {
    Tensor mu_g;         // G x D
    Tensor log_sigma_g;  // G x D
};

// hidden = ReLU(A_hat X Ws); mu = A_hat hidden Wmu; log_sigma = A_hat hidden Wsig.
// The output layer is linear by default; strict_relu wraps it in ReLU as a
// comparison mode (non-default, see docs).
LatentDistribution encode(const Tensor& a_hat, const Tensor& x, const VgaeParams& params,
                          bool strict_relu = false);

// reparameterized sample mu + sigma (.) eps, eps ~ N(0, I); gradients flow
// to mu and log_sigma
Tensor sample_latent(const LatentDistribution& dist, Rng& rng);

// logits = H H^T (symmetric); edge probability = sigmoid(logit)
Tensor decode_logits(const Tensor& h);

// Negated ELBO over one graph: summed weighted BCE against A~ targets over
// all N^2 ordered pairs plus KL to the standard normal prior. With
// pos_weight_on, positives are weighted by (N^2 - |A~+|) / |A~+|
// (falls back to 1 when there are no negatives).
Tensor elbo_loss(const Graph& g, const LatentDistribution& dist, const Tensor& sample,
                 bool pos_weight_on = true);

// 0.5 * sum_n sum_d (mu^2 + sigma^2 - 1 - 2 log sigma)
Tensor kl_divergence(const LatentDistribution& dist);

// (1/G) sum_g elbo_loss(g); reconstruction stays block-diagonal
Tensor total_loss(const GraphSet& gs, const VgaeParams& params, Rng& rng,
                  bool pos_weight_on = true);

// mu_g = node-mean of mu; log sigma_g = node-mean of log sigma
GraphLatent aggregate_graph(const LatentDistribution& dist,
                            const std::vector<std::pair<int, int>>& offsets);

struct ReconMetrics {
    double auc = 0.0;
    double accuracy_at_half = 0.0;
    double recon_rate = 0.0;  // fraction of true edges with probability > 0.5
    bool auc_defined = true;  // false when the graph has no edges
};

// scores every ordered pair by sigmoid(mu_i . mu_j); self-loop pairs count
// as positives per A~
ReconMetrics recon_metrics(const LatentDistribution& dist, const Graph& g);

}  // namespace igcl
