#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <memory>
#include <string>
#include <vector>

#include "igcl/rng.hpp"

namespace igcl {

struct TensorNode;

// Dense row-major 2-D array of doubles participating in a reverse-mode
// gradient tape. Tensor is a cheap shared handle; copies alias the same
// storage and tape node.
class Tensor {
public:
    Tensor() = default;
    Tensor(int rows, int cols, bool requires_grad = false);
    static Tensor zeros(int rows, int cols, bool requires_grad = false);
    static Tensor ones(int rows, int cols);
    static Tensor identity(int n);
    static Tensor from_rows(const std::vector<std::vector<double>>& rows,
                            bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    int rows() const;
    int cols() const;
    std::size_t size() const;
    bool defined() const { return node_ != nullptr; }

    double& at(int r, int c);
    double at(int r, int c) const;
    double* data();
    const double* data() const;

    bool requires_grad() const;
    void set_requires_grad(bool flag);
    const std::string& name() const;
    void set_name(const std::string& n);

    // Gradient accumulated by the last backward pass; empty before backward.
    bool has_grad() const;
    double grad_at(int r, int c) const;
    const std::vector<double>& grad() const;
    void zero_grad();

    // Value copy detached from the tape.
    Tensor detach() const;
    double item() const;  // requires a 1x1 tensor

    TensorNode* node() const { return node_.get(); }
    std::shared_ptr<TensorNode> shared_node() const { return node_; }

private:
    std::shared_ptr<TensorNode> node_;
    friend Tensor make_op_result(int, int, std::vector<std::shared_ptr<TensorNode>>,
                                 std::function<void(TensorNode&)>);
};

struct TensorNode {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
    std::string name;
    // tape bookkeeping; parents are kept alive until backward has run
    std::uint64_t tape_id = 0;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backward_fn;
    bool backward_done = false;

    void ensure_grad();
};

// --- shape / usage errors ------------------------------------------------

struct TensorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : TensorError {
    using TensorError::TensorError;
};
struct DomainError : TensorError {
    using TensorError::TensorError;
};
struct NumericError : TensorError {
    using TensorError::TensorError;
};

// --- primitive operations ------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double c);
Tensor add_const(const Tensor& a, double c);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);  // domain error on non-positive entries
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor square(const Tensor& a);
Tensor transpose(const Tensor& a);
Tensor sum_all(const Tensor& a);   // 1x1
Tensor mean_all(const Tensor& a);  // 1x1
Tensor row_sum(const Tensor& a);   // n x 1
Tensor col_sum(const Tensor& a);   // 1 x m
// adds row vector b (1 x m) to every row of a (n x m)
Tensor broadcast_row_add(const Tensor& a, const Tensor& b);
// per row: max + log sum exp(x - max); overflow-free
Tensor logsumexp_rows(const Tensor& a);
// extract main diagonal of a square matrix as n x 1
Tensor diag_as_col(const Tensor& a);
// select rows by index; adjoint scatter-adds
Tensor gather_rows(const Tensor& a, const std::vector<int>& idx);
// stack parts vertically; all parts must share the column count
Tensor concat_rows(const std::vector<Tensor>& parts);
// clamp entries to [lo, hi]; adjoint is identity inside, 0 outside
Tensor clamp(const Tensor& a, double lo, double hi);
// mean over weighted binary cross-entropy with logits is deliberately NOT
// provided; elbo composes the summed form below.
// sum_ij w_ij * (softplus(l_ij) - t_ij * l_ij), the stable BCE-with-logits
Tensor weighted_bce_with_logits_sum(const Tensor& logits, const Tensor& targets,
                                    const Tensor& weights);
Tensor dropout(const Tensor& a, double p, Rng& rng, bool training);

// --- backward ------------------------------------------------------------

// Reverse pass from a scalar loss. Visits recorded nodes in reverse order of
// creation and accumulates grads on every reachable requires_grad tensor.
// A second backward through the same loss is an error.
void backward(const Tensor& loss);

// --- initialization / optimizer ------------------------------------------

Tensor glorot_init(int fan_in, int fan_out, Rng& rng);
Tensor normal_init(int rows, int cols, double sd, Rng& rng);

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
};

// Bias-corrected Adam over a fixed parameter list. Weight decay is applied
// as an l2 gradient term g <- g + lambda * theta before the moment update.
class Adam {
public:
    Adam(std::vector<Tensor> params, double lr, double weight_decay = 0.0,
         double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step();
    void zero_grad();
    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }
    const std::vector<Tensor>& params() const { return params_; }
    const AdamState& state(std::size_t i) const { return states_[i]; }

private:
    std::vector<Tensor> params_;
    std::vector<AdamState> states_;
    double lr_, weight_decay_, beta1_, beta2_, eps_;
};

// Finite-difference gradient check: returns the max relative error between
// the analytic gradient of loss_fn w.r.t. each param and central differences
// with step h. loss_fn must be deterministic in the params.
double grad_check(const std::function<Tensor()>& loss_fn,
                  const std::vector<Tensor>& params, double h = 1e-5);

bool all_finite(const Tensor& t);

}  // namespace igcl
