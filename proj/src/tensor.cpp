#include "igcl/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace igcl {

namespace {
std::atomic<std::uint64_t> g_tape_counter{1};
}

void TensorNode::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

Tensor::Tensor(int rows, int cols, bool requires_grad) {
    if (rows <= 0 || cols <= 0) throw ShapeError("tensor dimensions must be positive");
    node_ = std::make_shared<TensorNode>();
    node_->rows = rows;
    node_->cols = cols;
    node_->data.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    node_->requires_grad = requires_grad;
    node_->tape_id = g_tape_counter.fetch_add(1);
}

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
    return Tensor(rows, cols, requires_grad);
}

Tensor Tensor::ones(int rows, int cols) {
    Tensor t(rows, cols);
    std::fill(t.data(), t.data() + t.size(), 1.0);
    return t;
}

Tensor Tensor::identity(int n) {
    Tensor t(n, n);
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows, bool requires_grad) {
    if (rows.empty() || rows[0].empty()) throw ShapeError("from_rows: empty input");
    Tensor t(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), requires_grad);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw ShapeError("from_rows: ragged rows");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            t.at(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    }
    return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    Tensor t(1, 1, requires_grad);
    t.at(0, 0) = v;
    return t;
}

int Tensor::rows() const { return node_->rows; }
int Tensor::cols() const { return node_->cols; }
std::size_t Tensor::size() const { return node_->data.size(); }

double& Tensor::at(int r, int c) { return node_->data[static_cast<std::size_t>(r) * node_->cols + c]; }
double Tensor::at(int r, int c) const { return node_->data[static_cast<std::size_t>(r) * node_->cols + c]; }
double* Tensor::data() { return node_->data.data(); }
const double* Tensor::data() const { return node_->data.data(); }

bool Tensor::requires_grad() const { return node_->requires_grad; }
void Tensor::set_requires_grad(bool flag) { node_->requires_grad = flag; }
const std::string& Tensor::name() const { return node_->name; }
void Tensor::set_name(const std::string& n) { node_->name = n; }

bool Tensor::has_grad() const { return node_->grad.size() == node_->data.size(); }
double Tensor::grad_at(int r, int c) const {
    return node_->grad[static_cast<std::size_t>(r) * node_->cols + c];
}
const std::vector<double>& Tensor::grad() const { return node_->grad; }
void Tensor::zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

Tensor Tensor::detach() const {
    Tensor t(rows(), cols(), false);
    t.node_->data = node_->data;
    t.node_->name = node_->name;
    return t;
}

double Tensor::item() const {
    if (rows() != 1 || cols() != 1) throw ShapeError("item: tensor is not 1x1");
    return node_->data[0];
}

bool all_finite(const Tensor& t) {
    for (double v : *(&t.node()->data)) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

// --- op plumbing ----------------------------------------------------------

Tensor make_op_result(int rows, int cols, std::vector<std::shared_ptr<TensorNode>> parents,
                      std::function<void(TensorNode&)> backward_fn) {
    bool needs = false;
    for (const auto& p : parents)
        if (p->requires_grad) needs = true;
    Tensor out(rows, cols, needs);
    if (needs) {
        out.node_->parents = std::move(parents);
        out.node_->backward_fn = std::move(backward_fn);
    }
    return out;
}

static void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError(std::string(op) + ": shape mismatch");
}

// --- primitive ops --------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
    const int n = a.rows(), k = a.cols(), m = b.cols();
    auto an = a.shared_node();
    auto bn = b.shared_node();
    Tensor out = make_op_result(n, m, {an, bn}, [an, bn, n, k, m](TensorNode& self) {
        // dA = dOut * B^T ; dB = A^T * dOut
        if (an->requires_grad) {
            an->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    const double g = self.grad[static_cast<std::size_t>(i) * m + j];
                    if (g == 0.0) continue;
                    for (int t = 0; t < k; ++t)
                        an->grad[static_cast<std::size_t>(i) * k + t] +=
                            g * bn->data[static_cast<std::size_t>(t) * m + j];
                }
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int t = 0; t < k; ++t) {
                    const double av = an->data[static_cast<std::size_t>(i) * k + t];
                    if (av == 0.0) continue;
                    for (int j = 0; j < m; ++j)
                        bn->grad[static_cast<std::size_t>(t) * m + j] +=
                            av * self.grad[static_cast<std::size_t>(i) * m + j];
                }
        }
    });
    // ikj loop order keeps the inner loop contiguous
    double* od = out.data();
    const double* ad = a.data();
    const double* bd = b.data();
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < k; ++t) {
            const double av = ad[static_cast<std::size_t>(i) * k + t];
            if (av == 0.0) continue;
            const double* brow = bd + static_cast<std::size_t>(t) * m;
            double* orow = od + static_cast<std::size_t>(i) * m;
            for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    return out;
}

// shared helper for elementwise binary ops
template <typename Fwd, typename BwdA, typename BwdB>
static Tensor binary_op(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, BwdA bwd_a,
                        BwdB bwd_b) {
    check_same_shape(a, b, name);
    auto an = a.shared_node();
    auto bn = b.shared_node();
    const std::size_t sz = a.size();
    Tensor out = make_op_result(a.rows(), a.cols(), {an, bn},
                                [an, bn, sz, bwd_a, bwd_b](TensorNode& self) {
                                    if (an->requires_grad) {
                                        an->ensure_grad();
                                        for (std::size_t i = 0; i < sz; ++i)
                                            an->grad[i] += self.grad[i] * bwd_a(an->data[i], bn->data[i]);
                                    }
                                    if (bn->requires_grad) {
                                        bn->ensure_grad();
                                        for (std::size_t i = 0; i < sz; ++i)
                                            bn->grad[i] += self.grad[i] * bwd_b(an->data[i], bn->data[i]);
                                    }
                                });
    for (std::size_t i = 0; i < sz; ++i) out.data()[i] = fwd(a.data()[i], b.data()[i]);
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "sub", [](double x, double y) { return x - y; },
        [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double, double y) { return y; }, [](double x, double) { return x; });
}

// shared helper for elementwise unary ops; bwd receives (input, output)
template <typename Fwd, typename Bwd>
static Tensor unary_op(const Tensor& a, Fwd fwd, Bwd bwd) {
    auto an = a.shared_node();
    const std::size_t sz = a.size();
    Tensor out = make_op_result(a.rows(), a.cols(), {an}, [an, sz, bwd](TensorNode& self) {
        an->ensure_grad();
        for (std::size_t i = 0; i < sz; ++i)
            an->grad[i] += self.grad[i] * bwd(an->data[i], self.data[i]);
    });
    for (std::size_t i = 0; i < sz; ++i) out.data()[i] = fwd(a.data()[i]);
    return out;
}

Tensor scale(const Tensor& a, double c) {
    return unary_op(
        a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Tensor add_const(const Tensor& a, double c) {
    return unary_op(
        a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Tensor exp(const Tensor& a) {
    return unary_op(
        a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.data()[i] <= 0.0) throw DomainError("log: non-positive input");
    return unary_op(
        a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor relu(const Tensor& a) {
    // subgradient at 0 is 0
    return unary_op(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

static double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& a) {
    return unary_op(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor square(const Tensor& a) {
    return unary_op(
        a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    return unary_op(
        a, [lo, hi](double x) { return std::min(hi, std::max(lo, x)); },
        [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor transpose(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    auto an = a.shared_node();
    Tensor out = make_op_result(m, n, {an}, [an, n, m](TensorNode& self) {
        an->ensure_grad();
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                an->grad[static_cast<std::size_t>(j) * m + i] +=
                    self.grad[static_cast<std::size_t>(i) * n + j];
    });
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

Tensor sum_all(const Tensor& a) {
    auto an = a.shared_node();
    const std::size_t sz = a.size();
    Tensor out = make_op_result(1, 1, {an}, [an, sz](TensorNode& self) {
        an->ensure_grad();
        for (std::size_t i = 0; i < sz; ++i) an->grad[i] += self.grad[0];
    });
    double s = 0.0;
    for (std::size_t i = 0; i < sz; ++i) s += a.data()[i];
    out.at(0, 0) = s;
    return out;
}

Tensor mean_all(const Tensor& a) { return scale(sum_all(a), 1.0 / static_cast<double>(a.size())); }

Tensor row_sum(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    auto an = a.shared_node();
    Tensor out = make_op_result(n, 1, {an}, [an, n, m](TensorNode& self) {
        an->ensure_grad();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                an->grad[static_cast<std::size_t>(i) * m + j] += self.grad[i];
    });
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += a.at(i, j);
        out.at(i, 0) = s;
    }
    return out;
}

Tensor col_sum(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    auto an = a.shared_node();
    Tensor out = make_op_result(1, m, {an}, [an, n, m](TensorNode& self) {
        an->ensure_grad();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                an->grad[static_cast<std::size_t>(i) * m + j] += self.grad[j];
    });
    for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += a.at(i, j);
        out.at(0, j) = s;
    }
    return out;
}

Tensor broadcast_row_add(const Tensor& a, const Tensor& b) {
    if (b.rows() != 1 || b.cols() != a.cols())
        throw ShapeError("broadcast_row_add: b must be 1 x cols(a)");
    const int n = a.rows(), m = a.cols();
    auto an = a.shared_node();
    auto bn = b.shared_node();
    Tensor out = make_op_result(n, m, {an, bn}, [an, bn, n, m](TensorNode& self) {
        if (an->requires_grad) {
            an->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j)
                    bn->grad[j] += self.grad[static_cast<std::size_t>(i) * m + j];
        }
    });
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out.at(i, j) = a.at(i, j) + b.at(0, j);
    return out;
}

Tensor logsumexp_rows(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    auto an = a.shared_node();
    // adjoint: softmax of the row
    Tensor out = make_op_result(n, 1, {an}, [an, n, m](TensorNode& self) {
        an->ensure_grad();
        for (int i = 0; i < n; ++i) {
            const double lse = self.data[i];
            const double g = self.grad[i];
            if (g == 0.0) continue;
            for (int j = 0; j < m; ++j)
                an->grad[static_cast<std::size_t>(i) * m + j] +=
                    g * std::exp(an->data[static_cast<std::size_t>(i) * m + j] - lse);
        }
    });
    for (int i = 0; i < n; ++i) {
        double mx = a.at(i, 0);
        for (int j = 1; j < m; ++j) mx = std::max(mx, a.at(i, j));
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += std::exp(a.at(i, j) - mx);
        out.at(i, 0) = mx + std::log(s);
    }
    return out;
}

Tensor diag_as_col(const Tensor& a) {
    if (a.rows() != a.cols()) throw ShapeError("diag_as_col: square matrix required");
    const int n = a.rows();
    auto an = a.shared_node();
    Tensor out = make_op_result(n, 1, {an}, [an, n](TensorNode& self) {
        an->ensure_grad();
        for (int i = 0; i < n; ++i)
            an->grad[static_cast<std::size_t>(i) * n + i] += self.grad[i];
    });
    for (int i = 0; i < n; ++i) out.at(i, 0) = a.at(i, i);
    return out;
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& idx) {
    const int m = a.cols();
    for (int i : idx)
        if (i < 0 || i >= a.rows()) throw ShapeError("gather_rows: index out of range");
    auto an = a.shared_node();
    auto idx_copy = idx;
    Tensor out = make_op_result(static_cast<int>(idx.size()), m, {an},
                                [an, idx_copy, m](TensorNode& self) {
                                    an->ensure_grad();
                                    for (std::size_t r = 0; r < idx_copy.size(); ++r)
                                        for (int j = 0; j < m; ++j)
                                            an->grad[static_cast<std::size_t>(idx_copy[r]) * m + j] +=
                                                self.grad[r * m + j];
                                });
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (int j = 0; j < m; ++j) out.at(static_cast<int>(r), j) = a.at(idx[r], j);
    return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: empty input");
    const int m = parts[0].cols();
    int total = 0;
    std::vector<std::shared_ptr<TensorNode>> nodes;
    for (const auto& p : parts) {
        if (p.cols() != m) throw ShapeError("concat_rows: column mismatch");
        total += p.rows();
        nodes.push_back(p.shared_node());
    }
    auto nodes_copy = nodes;
    Tensor out = make_op_result(total, m, std::move(nodes), [nodes_copy, m](TensorNode& self) {
        std::size_t off = 0;
        for (const auto& p : nodes_copy) {
            const std::size_t sz = p->data.size();
            if (p->requires_grad) {
                p->ensure_grad();
                for (std::size_t i = 0; i < sz; ++i) p->grad[i] += self.grad[off + i];
            }
            off += sz;
        }
    });
    int r0 = 0;
    for (const auto& p : parts) {
        for (int i = 0; i < p.rows(); ++i)
            for (int j = 0; j < m; ++j) out.at(r0 + i, j) = p.at(i, j);
        r0 += p.rows();
    }
    return out;
}

Tensor weighted_bce_with_logits_sum(const Tensor& logits, const Tensor& targets,
                                    const Tensor& weights) {
    check_same_shape(logits, targets, "bce");
    check_same_shape(logits, weights, "bce");
    auto ln = logits.shared_node();
    auto tn = targets.shared_node();
    auto wn = weights.shared_node();
    const std::size_t sz = logits.size();
    Tensor out = make_op_result(1, 1, {ln, tn, wn}, [ln, tn, wn, sz](TensorNode& self) {
        ln->ensure_grad();
        const double g = self.grad[0];
        for (std::size_t i = 0; i < sz; ++i)
            ln->grad[i] += g * wn->data[i] * (stable_sigmoid(ln->data[i]) - tn->data[i]);
    });
    double s = 0.0;
    for (std::size_t i = 0; i < sz; ++i) {
        const double l = logits.data()[i];
        const double t = targets.data()[i];
        // softplus(l) - t*l, computed without overflow
        const double sp = std::max(l, 0.0) + std::log1p(std::exp(-std::fabs(l)));
        s += weights.data()[i] * (sp - t * l);
    }
    out.at(0, 0) = s;
    if (!std::isfinite(s)) throw NumericError("bce: non-finite loss");
    return out;
}

Tensor dropout(const Tensor& a, double p, Rng& rng, bool training) {
    if (p < 0.0 || p >= 1.0) throw DomainError("dropout: p must be in [0, 1)");
    if (!training || p == 0.0) return a;
    const std::size_t sz = a.size();
    auto mask = std::make_shared<std::vector<double>>(sz);
    const double keep = 1.0 - p;
    for (std::size_t i = 0; i < sz; ++i) (*mask)[i] = rng.uniform() < p ? 0.0 : 1.0 / keep;
    auto an = a.shared_node();
    Tensor out = make_op_result(a.rows(), a.cols(), {an}, [an, mask, sz](TensorNode& self) {
        an->ensure_grad();
        for (std::size_t i = 0; i < sz; ++i) an->grad[i] += self.grad[i] * (*mask)[i];
    });
    for (std::size_t i = 0; i < sz; ++i) out.data()[i] = a.data()[i] * (*mask)[i];
    return out;
}

// --- backward -------------------------------------------------------------

void backward(const Tensor& loss) {
    if (loss.rows() != 1 || loss.cols() != 1)
        throw TensorError("backward: loss must be a 1x1 scalar");
    TensorNode* root = loss.node();
    if (root->backward_done) throw TensorError("backward: tape already consumed");
    if (!root->requires_grad)
        throw TensorError("backward: loss is detached from all parameters");
    // collect reachable nodes; creation order (tape_id) is a topological order
    std::vector<TensorNode*> nodes;
    std::unordered_set<TensorNode*> seen;
    std::vector<TensorNode*> stack{root};
    seen.insert(root);
    while (!stack.empty()) {
        TensorNode* n = stack.back();
        stack.pop_back();
        nodes.push_back(n);
        for (const auto& p : n->parents)
            if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
    std::sort(nodes.begin(), nodes.end(),
              [](TensorNode* a, TensorNode* b) { return a->tape_id > b->tape_id; });
    root->ensure_grad();
    root->grad[0] = 1.0;
    for (TensorNode* n : nodes) {
        if (n->backward_fn && n->grad.size() == n->data.size()) n->backward_fn(*n);
    }
    root->backward_done = true;
}

// --- init / optimizer -----------------------------------------------------

Tensor glorot_init(int fan_in, int fan_out, Rng& rng) {
    if (fan_in < 1 || fan_out < 1) throw TensorError("glorot_init: fans must be >= 1");
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor t(fan_in, fan_out, true);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-limit, limit);
    return t;
}

Tensor normal_init(int rows, int cols, double sd, Rng& rng) {
    Tensor t(rows, cols, true);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = sd * rng.normal();
    return t;
}

Adam::Adam(std::vector<Tensor> params, double lr, double weight_decay, double beta1, double beta2,
           double eps)
    : params_(std::move(params)),
      lr_(lr),
      weight_decay_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
    states_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        states_[i].m.assign(params_[i].size(), 0.0);
        states_[i].v.assign(params_[i].size(), 0.0);
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

void Adam::step() {
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = params_[pi];
        if (!p.has_grad()) continue;
        AdamState& st = states_[pi];
        st.t += 1;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(st.t));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(st.t));
        for (std::size_t i = 0; i < p.size(); ++i) {
            double g = p.grad()[i];
            if (!std::isfinite(g))
                throw NumericError("adam: non-finite gradient in parameter '" +
                                   (p.name().empty() ? std::string("<unnamed>") : p.name()) + "'");
            g += weight_decay_ * p.data()[i];
            st.m[i] = beta1_ * st.m[i] + (1.0 - beta1_) * g;
            st.v[i] = beta2_ * st.v[i] + (1.0 - beta2_) * g * g;
            const double mhat = st.m[i] / bc1;
            const double vhat = st.v[i] / bc2;
            p.data()[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

double grad_check(const std::function<Tensor()>& loss_fn, const std::vector<Tensor>& params,
                  double h) {
    for (auto p : params) p.zero_grad();
    Tensor loss = loss_fn();
    backward(loss);
    double max_rel = 0.0;
    for (auto p : params) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double orig = p.data()[i];
            p.data()[i] = orig + h;
            const double fp = loss_fn().item();
            p.data()[i] = orig - h;
            const double fm = loss_fn().item();
            p.data()[i] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = p.has_grad() ? p.grad()[i] : 0.0;
            const double denom = std::max({std::fabs(numeric), std::fabs(analytic), 1e-3});
            max_rel = std::max(max_rel, std::fabs(numeric - analytic) / denom);
        }
    }
    return max_rel;
}

}  // namespace igcl
