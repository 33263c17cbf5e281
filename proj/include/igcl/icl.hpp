#pragma once

#include "igcl/tensor.hpp"

namespace igcl {

// Aligned rows: row n of z, mu and sigma refer to the same node or graph.
// mu and sigma are treated as data — contrastive gradients stop at them and
// flow to z only.
struct ContrastiveBatch {
    Tensor z;      // b x D backbone+projection embeddings
    Tensor mu;     // b x D latent means
    Tensor sigma;  // b x D latent stddevs, elementwise, >= 0
    double tau = 1.0;

    void validate() const;
};

// M-sample contrastive loss: draws a_n^m ~ N(mu_n, diag(sigma_n^2)) and
// averages -log softmax over anchors. Deterministic given the rng state.
Tensor cl_loss_mc(const ContrastiveBatch& batch, int m_samples, Rng& rng);

// fast value-only Monte-Carlo estimate with its standard error (the per-
// sample losses are summed directly, no tape)
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};
McEstimate cl_loss_mc_stats(const ContrastiveBatch& batch, int m_samples, Rng& rng);

// Closed-form upper bound on the expected contrastive loss:
// (1/b) sum_n -log[ exp(z_n.mu_n / tau) /
//                   sum_n' exp(z_n'.mu_n / tau + q_n'n / (2 tau^2)) ]
// with q_n'n = sum_d sigma_n,d^2 (z_n',d - z_n,d)^2. O(b^2 D), no sample
// count anywhere.
Tensor icl_upper(const ContrastiveBatch& batch);

// pre-simplification form (1/b) sum_n log sum_n' exp(delta.mu_n / tau +
// delta' Sigma_n delta / (2 tau^2)); retained as an algebraic cross-check
Tensor icl_upper_pairwise_form(const ContrastiveBatch& batch);

// icl_upper with mu = 0, sigma = 1 (contrast against pure noise)
Tensor noise_contrast_loss(const Tensor& z, double tau);

// standard two-view InfoNCE with explicit augmentations, symmetric average
// over both directions
Tensor explicit_cl_loss(const Tensor& z_view1, const Tensor& z_view2, double tau);

// plain InfoNCE of z against fixed targets (equals icl_upper at sigma = 0)
Tensor info_nce(const Tensor& z, const Tensor& targets, double tau);

}  // namespace igcl
