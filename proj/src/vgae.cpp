#include "igcl/vgae.hpp"

#include <algorithm>
#include <cmath>

namespace igcl {

namespace {
constexpr double kLogSigmaLo = -30.0;
constexpr double kLogSigmaHi = 10.0;
}  // namespace

VgaeParams VgaeParams::init(int in_dim, int hidden_dim, int latent_dim, Rng& rng) {
    VgaeParams p;
    p.w_shared = glorot_init(in_dim, hidden_dim, rng);
    p.w_mu = glorot_init(hidden_dim, latent_dim, rng);
    p.w_sigma = glorot_init(hidden_dim, latent_dim, rng);
    p.w_shared.set_name("vgae_w_shared");
    p.w_mu.set_name("vgae_w_mu");
    p.w_sigma.set_name("vgae_w_sigma");
    return p;
}

Tensor LatentDistribution::sigma_detached() const {
    Tensor s(log_sigma.rows(), log_sigma.cols());
    for (std::size_t i = 0; i < s.size(); ++i)
        s.data()[i] = std::exp(std::clamp(log_sigma.data()[i], kLogSigmaLo, kLogSigmaHi));
    return s;
}

LatentDistribution encode(const Tensor& a_hat, const Tensor& x, const VgaeParams& params,
                          bool strict_relu) {
    Tensor hidden = relu(matmul(a_hat, matmul(x, params.w_shared)));
    Tensor mu = matmul(a_hat, matmul(hidden, params.w_mu));
    Tensor log_sigma = matmul(a_hat, matmul(hidden, params.w_sigma));
    if (strict_relu) {
        mu = relu(mu);
        log_sigma = relu(log_sigma);
    }
    return {mu, log_sigma};
}

Tensor sample_latent(const LatentDistribution& dist, Rng& rng) {
    Tensor eps(dist.mu.rows(), dist.mu.cols());
    for (std::size_t i = 0; i < eps.size(); ++i) eps.data()[i] = rng.normal();
    Tensor sigma = igcl::exp(clamp(dist.log_sigma, kLogSigmaLo, kLogSigmaHi));
    return add(dist.mu, mul(sigma, eps));
}

Tensor decode_logits(const Tensor& h) { return matmul(h, transpose(h)); }

Tensor kl_divergence(const LatentDistribution& dist) {
    Tensor ls = clamp(dist.log_sigma, kLogSigmaLo, kLogSigmaHi);
    Tensor sigma_sq = igcl::exp(scale(ls, 2.0));
    // mu^2 + sigma^2 - 1 - 2 log sigma, summed
    Tensor terms = sub(add(square(dist.mu), sigma_sq), add_const(scale(ls, 2.0), 1.0));
    return scale(sum_all(terms), 0.5);
}

Tensor elbo_loss(const Graph& g, const LatentDistribution& dist, const Tensor& sample,
                 bool pos_weight_on) {
    const int n = g.num_nodes;
    Tensor targets(n, n);
    for (auto [i, j] : g.edges) {
        targets.at(i, j) = 1.0;
        targets.at(j, i) = 1.0;
    }
    for (int i = 0; i < n; ++i) targets.at(i, i) = 1.0;  // A~ includes self-loops
    double positives = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) positives += targets.data()[i];
    const double negatives = static_cast<double>(n) * n - positives;
    const double pos_w = (pos_weight_on && negatives > 0.0) ? negatives / positives : 1.0;
    Tensor weights(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) weights.at(i, j) = targets.at(i, j) > 0.0 ? pos_w : 1.0;

    Tensor recon = weighted_bce_with_logits_sum(decode_logits(sample), targets, weights);
    Tensor loss = add(recon, kl_divergence(dist));
    if (!std::isfinite(loss.item())) throw NumericError("elbo_loss: non-finite loss");
    return loss;
}

Tensor total_loss(const GraphSet& gs, const VgaeParams& params, Rng& rng, bool pos_weight_on) {
    if (gs.graphs.empty()) throw UsageError("total_loss: empty graph set");
    Tensor acc;
    for (const auto& g : gs.graphs) {
        Tensor a_hat = normalized_adjacency(g);
        LatentDistribution dist = encode(a_hat, g.features, params);
        Tensor sample = sample_latent(dist, rng);
        Tensor l = elbo_loss(g, dist, sample, pos_weight_on);
        acc = acc.defined() ? add(acc, l) : l;
    }
    return scale(acc, 1.0 / static_cast<double>(gs.num_graphs()));
}

GraphLatent aggregate_graph(const LatentDistribution& dist,
                            const std::vector<std::pair<int, int>>& offsets) {
    for (auto [s, e] : offsets)
        if (s >= e) throw UsageError("aggregate_graph: empty graph range");
    std::vector<std::pair<int, int>> off = offsets;
    GraphLatent out;
    // mean over node rows; log sigma averaged in log space (geometric mean)
    auto mean_rows = [&](const Tensor& t) {
        std::vector<Tensor> rows;
        for (auto [s, e] : off) {
            std::vector<int> idx;
            for (int i = s; i < e; ++i) idx.push_back(i);
            rows.push_back(scale(col_sum(gather_rows(t, idx)), 1.0 / static_cast<double>(e - s)));
        }
        return concat_rows(rows);
    };
    out.mu_g = mean_rows(dist.mu);
    out.log_sigma_g = mean_rows(dist.log_sigma);
    return out;
}

ReconMetrics recon_metrics(const LatentDistribution& dist, const Graph& g) {
    const int n = g.num_nodes;
    Tensor mu = dist.mu;
    ReconMetrics m;
    std::vector<double> pos_scores, neg_scores;
    int edge_hits = 0, correct = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double logit = 0.0;
            for (int c = 0; c < mu.cols(); ++c) logit += mu.at(i, c) * mu.at(j, c);
            const double p = 1.0 / (1.0 + std::exp(-std::max(-500.0, std::min(500.0, logit))));
            const bool is_pos = i == j || g.has_edge(i, j);
            (is_pos ? pos_scores : neg_scores).push_back(p);
            if ((p > 0.5) == is_pos) ++correct;
            if (is_pos && i != j && p > 0.5) ++edge_hits;
        }
    m.accuracy_at_half = static_cast<double>(correct) / (static_cast<double>(n) * n);
    const int true_edges = 2 * g.num_edges();
    m.recon_rate = true_edges > 0 ? static_cast<double>(edge_hits) / true_edges : 0.0;
    if (g.num_edges() == 0) {
        m.auc_defined = false;
        return m;
    }
    // Mann-Whitney AUC with tie correction via midranks
    std::vector<std::pair<double, int>> all;  // (score, is_pos)
    for (double s : pos_scores) all.emplace_back(s, 1);
    for (double s : neg_scores) all.emplace_back(s, 0);
    std::sort(all.begin(), all.end());
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].first == all[i].first) ++j;
        const double midrank = 0.5 * (static_cast<double>(i) + static_cast<double>(j - 1)) + 1.0;
        for (std::size_t k = i; k < j; ++k)
            if (all[k].second) rank_sum_pos += midrank;
        i = j;
    }
    const double np = static_cast<double>(pos_scores.size());
    const double nn = static_cast<double>(neg_scores.size());
    m.auc = (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
    return m;
}

}  // namespace igcl
