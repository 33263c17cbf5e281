#include "igcl/icl.hpp"

#include <cmath>
#include <vector>

#include "igcl/graph.hpp"  // UsageError

namespace igcl {

void ContrastiveBatch::validate() const {
    if (!(tau > 0.0)) throw UsageError("contrastive batch: tau must be positive");
    if (mu.rows() != z.rows() || mu.cols() != z.cols() || sigma.rows() != z.rows() ||
        sigma.cols() != z.cols())
        throw ShapeError("contrastive batch: z, mu, sigma must share shape");
    for (std::size_t i = 0; i < sigma.size(); ++i)
        if (sigma.data()[i] < 0.0) throw UsageError("contrastive batch: sigma must be >= 0");
}

// shared softmax-anchor core: loss = mean_n [ lse_n'(scores^T row n) - diag ]
static Tensor anchor_softmax_loss(const Tensor& scores, double tau) {
    Tensor m = scale(transpose(scores), 1.0 / tau);
    Tensor lse = logsumexp_rows(m);
    Tensor pos = scale(diag_as_col(scores), 1.0 / tau);
    return mean_all(sub(lse, pos));
}

Tensor info_nce(const Tensor& z, const Tensor& targets, double tau) {
    if (!(tau > 0.0)) throw UsageError("info_nce: tau must be positive");
    if (z.rows() != targets.rows() || z.cols() != targets.cols())
        throw ShapeError("info_nce: shape mismatch");
    return anchor_softmax_loss(matmul(z, transpose(targets)), tau);
}

Tensor icl_upper(const ContrastiveBatch& batch) {
    batch.validate();
    const double tau = batch.tau;
    const Tensor& z = batch.z;
    Tensor mu = batch.mu.requires_grad() ? batch.mu.detach() : batch.mu;
    Tensor var = square(batch.sigma.requires_grad() ? batch.sigma.detach() : batch.sigma);

    // S[i][n] = z_i . mu_n
    Tensor s = matmul(z, transpose(mu));
    // q[i][n] = sum_d var[n,d] (z[i,d] - z[n,d])^2, expanded into three terms
    Tensor a1 = matmul(square(z), transpose(var));          // sum var_n z_i^2
    Tensor a2 = matmul(z, transpose(mul(var, z)));          // sum var_n z_i z_n
    Tensor a3 = transpose(row_sum(mul(var, square(z))));    // 1 x b: sum var_n z_n^2
    Tensor q = broadcast_row_add(sub(a1, scale(a2, 2.0)), a3);
    // logits[i][n] = S/tau + q/(2 tau^2); anchor n reads column n
    Tensor logits = add(scale(s, 1.0 / tau), scale(q, 1.0 / (2.0 * tau * tau)));
    Tensor lse = logsumexp_rows(transpose(logits));
    Tensor pos = scale(diag_as_col(s), 1.0 / tau);
    Tensor loss = mean_all(sub(lse, pos));
    if (!std::isfinite(loss.item())) throw NumericError("icl_upper: non-finite loss");
    return loss;
}

Tensor icl_upper_pairwise_form(const ContrastiveBatch& batch) {
    batch.validate();
    // direct per-pair evaluation of the pre-simplification form; value-only
    const int b = batch.z.rows();
    const int d = batch.z.cols();
    const double tau = batch.tau;
    double total = 0.0;
    std::vector<double> terms(b);
    for (int n = 0; n < b; ++n) {
        for (int i = 0; i < b; ++i) {
            double dot_mu = 0.0, quad = 0.0;
            for (int c = 0; c < d; ++c) {
                const double delta = batch.z.at(i, c) - batch.z.at(n, c);
                dot_mu += delta * batch.mu.at(n, c);
                quad += batch.sigma.at(n, c) * batch.sigma.at(n, c) * delta * delta;
            }
            terms[i] = dot_mu / tau + quad / (2.0 * tau * tau);
        }
        double mx = terms[0];
        for (int i = 1; i < b; ++i) mx = std::max(mx, terms[i]);
        double sum = 0.0;
        for (int i = 0; i < b; ++i) sum += std::exp(terms[i] - mx);
        total += mx + std::log(sum);
    }
    return Tensor::scalar(total / b);
}

Tensor noise_contrast_loss(const Tensor& z, double tau) {
    ContrastiveBatch batch;
    batch.z = z;
    batch.mu = Tensor::zeros(z.rows(), z.cols());
    batch.sigma = Tensor::ones(z.rows(), z.cols());
    batch.tau = tau;
    return icl_upper(batch);
}

Tensor explicit_cl_loss(const Tensor& z_view1, const Tensor& z_view2, double tau) {
    if (z_view1.rows() != z_view2.rows() || z_view1.cols() != z_view2.cols())
        throw ShapeError("explicit_cl_loss: view shapes differ");
    Tensor forward = info_nce(z_view1, z_view2, tau);
    Tensor backward_dir = info_nce(z_view2, z_view1, tau);
    return scale(add(forward, backward_dir), 0.5);
}

Tensor cl_loss_mc(const ContrastiveBatch& batch, int m_samples, Rng& rng) {
    batch.validate();
    if (m_samples < 1) throw UsageError("cl_loss_mc: m_samples must be >= 1");
    const int b = batch.z.rows();
    const int d = batch.z.cols();
    Tensor acc;
    for (int m = 0; m < m_samples; ++m) {
        Tensor aug(b, d);  // latents are data: no grad through the sample
        for (int n = 0; n < b; ++n)
            for (int c = 0; c < d; ++c)
                aug.at(n, c) = batch.mu.at(n, c) + batch.sigma.at(n, c) * rng.normal();
        Tensor term = anchor_softmax_loss(matmul(batch.z, transpose(aug)), batch.tau);
        acc = acc.defined() ? add(acc, term) : term;
    }
    return scale(acc, 1.0 / static_cast<double>(m_samples));
}

McEstimate cl_loss_mc_stats(const ContrastiveBatch& batch, int m_samples, Rng& rng) {
    batch.validate();
    if (m_samples < 1) throw UsageError("cl_loss_mc_stats: m_samples must be >= 1");
    const int b = batch.z.rows();
    const int d = batch.z.cols();
    const double tau = batch.tau;
    std::vector<double> logits(b);
    double mean = 0.0, m2 = 0.0;
    for (int m = 0; m < m_samples; ++m) {
        double sample_loss = 0.0;
        for (int n = 0; n < b; ++n) {
            // one augmentation for anchor n
            double mx = -1e300;
            double pos = 0.0;
            // draw a_n then score all rows against it
            thread_local std::vector<double> a;
            a.resize(d);
            for (int c = 0; c < d; ++c)
                a[c] = batch.mu.at(n, c) + batch.sigma.at(n, c) * rng.normal();
            for (int i = 0; i < b; ++i) {
                double dot = 0.0;
                for (int c = 0; c < d; ++c) dot += batch.z.at(i, c) * a[c];
                logits[i] = dot / tau;
                mx = std::max(mx, logits[i]);
                if (i == n) pos = logits[i];
            }
            double sum = 0.0;
            for (int i = 0; i < b; ++i) sum += std::exp(logits[i] - mx);
            sample_loss += mx + std::log(sum) - pos;
        }
        sample_loss /= b;
        // Welford update over per-sample losses
        const double delta = sample_loss - mean;
        mean += delta / (m + 1);
        m2 += delta * (sample_loss - mean);
    }
    McEstimate est;
    est.mean = mean;
    est.std_error =
        m_samples > 1 ? std::sqrt(m2 / (m_samples - 1) / static_cast<double>(m_samples)) : 0.0;
    return est;
}

}  // namespace igcl
