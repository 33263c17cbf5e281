#include "igcl/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "igcl/graph.hpp"  // UsageError, ParseError, split helpers

namespace igcl {

void EmbeddingTable::validate() const {
    if (!vectors.defined()) {
        if (!ids.empty() || !labels.empty())
            throw UsageError("embedding table: rows without vectors");
        return;
    }
    if (static_cast<int>(ids.size()) != vectors.rows())
        throw UsageError("embedding table: id count != row count");
    if (!labels.empty() && labels.size() != ids.size())
        throw UsageError("embedding table: label count != id count");
}

EmbeddingTable EmbeddingTable::select(const std::vector<int>& idx) const {
    EmbeddingTable out;
    if (idx.empty()) return out;
    out.vectors = Tensor(static_cast<int>(idx.size()), vectors.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.ids.push_back(ids[idx[r]]);
        if (!labels.empty()) out.labels.push_back(labels[idx[r]]);
        for (int c = 0; c < vectors.cols(); ++c)
            out.vectors.at(static_cast<int>(r), c) = vectors.at(idx[r], c);
    }
    return out;
}

ProbeLoss probe_loss_from_string(const std::string& s) {
    if (s == "logistic") return ProbeLoss::logistic;
    if (s == "hinge") return ProbeLoss::hinge;
    throw UsageError("unknown probe loss: " + s + " (use logistic or hinge)");
}

static int count_classes(const std::vector<int>& labels) {
    int mx = -1;
    for (int l : labels) {
        if (l < 0) throw UsageError("probe: negative class label");
        mx = std::max(mx, l);
    }
    return mx + 1;
}

// inputs with a trailing bias column of ones
static Tensor with_bias(const Tensor& x) {
    Tensor out(x.rows(), x.cols() + 1);
    for (int i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < x.cols(); ++j) out.at(i, j) = x.at(i, j);
        out.at(i, x.cols()) = 1.0;
    }
    return out;
}

double probe_accuracy(const Tensor& weights, const EmbeddingTable& on) {
    on.validate();
    if (!on.has_labels()) throw UsageError("probe_accuracy: labels required");
    if (on.size() == 0) return 0.0;
    Tensor x = with_bias(on.vectors);
    if (x.cols() != weights.rows()) throw ShapeError("probe_accuracy: dimension mismatch");
    int hits = 0;
    for (int i = 0; i < x.rows(); ++i) {
        int best = 0;
        double best_v = -1e300;
        for (int c = 0; c < weights.cols(); ++c) {
            double v = 0.0;
            for (int j = 0; j < x.cols(); ++j) v += x.at(i, j) * weights.at(j, c);
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        if (best == on.labels[i]) ++hits;
    }
    return static_cast<double>(hits) / on.size();
}

static Tensor probe_loss_value(const Tensor& x, const std::vector<int>& labels, const Tensor& w,
                               ProbeLoss kind, int num_classes) {
    Tensor logits = matmul(x, w);
    if (kind == ProbeLoss::logistic) {
        // mean softmax cross-entropy; pick the true-class logit with a mask
        Tensor mask(x.rows(), num_classes);
        for (int i = 0; i < x.rows(); ++i) mask.at(i, labels[i]) = 1.0;
        Tensor pos = row_sum(mul(logits, mask));
        return mean_all(sub(logsumexp_rows(logits), pos));
    }
    // one-vs-rest hinge: mean over rows and classes of max(0, 1 - y * logit)
    Tensor sign(x.rows(), num_classes);
    for (int i = 0; i < x.rows(); ++i)
        for (int c = 0; c < num_classes; ++c) sign.at(i, c) = (c == labels[i]) ? 1.0 : -1.0;
    Tensor margins = relu(add_const(scale(mul(sign, logits), -1.0), 1.0));
    return mean_all(margins);
}

Tensor average_top_checkpoints(const std::vector<Tensor>& weights,
                               const std::vector<double>& val_accuracy, int top_k) {
    if (weights.empty() || weights.size() != val_accuracy.size())
        throw UsageError("average_top_checkpoints: empty or mismatched history");
    if (top_k < 1) throw UsageError("average_top_checkpoints: top_k must be >= 1");
    int take = top_k;
    if (static_cast<int>(weights.size()) < top_k) {
        std::cerr << "warning: only " << weights.size() << " checkpoints for top-" << top_k
                  << " averaging; using all\n";
        take = static_cast<int>(weights.size());
    }
    std::vector<int> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (val_accuracy[a] != val_accuracy[b]) return val_accuracy[a] > val_accuracy[b];
        return a < b;  // ties prefer the earlier epoch
    });
    Tensor avg(weights[0].rows(), weights[0].cols());
    for (int t = 0; t < take; ++t) {
        const Tensor& w = weights[order[t]];
        for (std::size_t i = 0; i < avg.size(); ++i) avg.data()[i] += w.data()[i] / take;
    }
    return avg;
}

ProbeResult linear_probe(const EmbeddingTable& train, const EmbeddingTable& val,
                         const EmbeddingTable& test, ProbeLoss loss_kind, double l2, int epochs,
                         double lr, Rng& rng, int top_k) {
    train.validate();
    val.validate();
    test.validate();
    if (!train.has_labels()) throw UsageError("linear_probe: training labels required");
    if (epochs < 1) throw UsageError("linear_probe: epochs must be >= 1");
    std::set<int> classes(train.labels.begin(), train.labels.end());
    if (classes.size() < 2) throw UsageError("linear_probe: training set has a single class");
    int num_classes = count_classes(train.labels);
    for (const auto* part : {&val, &test})
        if (part->has_labels()) num_classes = std::max(num_classes, count_classes(part->labels));

    Tensor x = with_bias(train.vectors);
    Tensor w = glorot_init(x.cols(), num_classes, rng);
    w.set_requires_grad(true);
    Adam opt({w}, lr, l2);

    const EmbeddingTable& val_used = val.size() > 0 ? val : train;
    ProbeResult res;
    std::vector<Tensor> snapshots;
    for (int e = 0; e < epochs; ++e) {
        opt.zero_grad();
        Tensor loss = probe_loss_value(x, train.labels, w, loss_kind, num_classes);
        if (!std::isfinite(loss.item()))
            throw NumericError("linear_probe: non-finite loss at epoch " + std::to_string(e));
        backward(loss);
        opt.step();
        snapshots.push_back(w.detach());
        res.val_history.push_back(probe_accuracy(snapshots.back(), val_used));
    }
    res.weights = average_top_checkpoints(snapshots, res.val_history, top_k);
    res.val_accuracy = probe_accuracy(res.weights, val_used);
    res.test_accuracy = test.size() > 0 ? probe_accuracy(res.weights, test) : res.val_accuracy;
    return res;
}

std::vector<double> default_c_grid() {
    return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
}

KfoldResult kfold_probe(const EmbeddingTable& emb, int k, const std::vector<double>& c_grid,
                        Rng& rng, ProbeLoss loss_kind, int epochs, double lr) {
    emb.validate();
    if (!emb.has_labels()) throw UsageError("kfold_probe: labels required");
    if (c_grid.empty()) throw UsageError("kfold_probe: empty C grid");
    const int n = emb.size();
    std::vector<Split> folds = kfold_indices(n, k, rng);

    KfoldResult out;
    for (int f = 0; f < k; ++f) {
        std::set<int> train_classes, all_classes;
        for (int i : folds[f].train) train_classes.insert(emb.labels[i]);
        for (int l : emb.labels) all_classes.insert(l);
        if (train_classes != all_classes) {
            std::cerr << "warning: fold " << f << " training part misses a class; excluded\n";
            out.excluded_folds.push_back(f);
            continue;
        }
        // nested 80/20 split of the training part selects C
        Rng fold_rng = rng.split(1000 + f);
        std::vector<int> inner = folds[f].train;
        for (int i = static_cast<int>(inner.size()) - 1; i > 0; --i)
            std::swap(inner[i], inner[fold_rng.below(static_cast<uint64_t>(i) + 1)]);
        const int n_inner_train = std::max(1, static_cast<int>(0.8 * inner.size()));
        std::vector<int> it(inner.begin(), inner.begin() + n_inner_train);
        std::vector<int> iv(inner.begin() + n_inner_train, inner.end());
        EmbeddingTable inner_train = emb.select(it);
        EmbeddingTable inner_val = emb.select(iv);
        EmbeddingTable empty;

        double best_c = c_grid.front(), best_acc = -1.0;
        std::set<int> it_classes(inner_train.labels.begin(), inner_train.labels.end());
        if (it_classes.size() >= 2 && inner_val.size() > 0) {
            for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
                Rng sel_rng = fold_rng.split(ci);
                ProbeResult r = linear_probe(inner_train, inner_val, empty, loss_kind,
                                             1.0 / c_grid[ci], epochs, lr, sel_rng);
                // ties go to the larger C: argmax accuracy is scale-invariant,
                // so heavy decay can look fine on a tiny validation part while
                // making the refit unstable
                if (r.val_accuracy >= best_acc) {
                    best_acc = r.val_accuracy;
                    best_c = c_grid[ci];
                }
            }
        }
        // retrain on the whole training part, evaluate on the held-out fold
        EmbeddingTable fold_train = emb.select(folds[f].train);
        EmbeddingTable fold_test = emb.select(folds[f].test);
        Rng fit_rng = fold_rng.split(999);
        ProbeResult fit = linear_probe(fold_train, fold_train, fold_test, loss_kind, 1.0 / best_c,
                                       epochs, lr, fit_rng);
        out.fold_accuracies.push_back(fit.test_accuracy);
        out.chosen_c.push_back(best_c);
    }
    if (out.fold_accuracies.empty()) throw UsageError("kfold_probe: every fold was excluded");
    double m = 0.0;
    for (double a : out.fold_accuracies) m += a;
    m /= out.fold_accuracies.size();
    double v = 0.0;
    for (double a : out.fold_accuracies) v += (a - m) * (a - m);
    out.mean_accuracy = m;
    out.sd_accuracy = out.fold_accuracies.size() > 1
                          ? std::sqrt(v / (out.fold_accuracies.size() - 1))
                          : 0.0;
    return out;
}

void export_embeddings(const EmbeddingTable& emb, const std::string& path) {
    emb.validate();
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open for writing: " + path);
    const int d = emb.vectors.defined() ? emb.vectors.cols() : 0;
    f << "id";
    if (emb.has_labels()) f << ",label";
    for (int j = 0; j < d; ++j) f << ",v" << j;
    f << "\n";
    char buf[64];
    for (int i = 0; i < emb.size(); ++i) {
        f << emb.ids[i];
        if (emb.has_labels()) f << ',' << emb.labels[i];
        for (int j = 0; j < d; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", emb.vectors.at(i, j));
            f << ',' << buf;
        }
        f << "\n";
    }
    if (!f) throw ParseError("write failed: " + path);
}

EmbeddingTable import_embeddings(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw ParseError(path + ": missing header");
    std::vector<std::string> cols;
    std::stringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) cols.push_back(tok);
    if (cols.empty() || cols[0] != "id") throw ParseError(path + ":1: header must start with id");
    const bool has_labels = cols.size() > 1 && cols[1] == "label";
    const int d = static_cast<int>(cols.size()) - 1 - (has_labels ? 1 : 0);

    EmbeddingTable emb;
    std::vector<double> values;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::vector<std::string> parts;
        while (std::getline(ls, tok, ',')) parts.push_back(tok);
        if (static_cast<int>(parts.size()) != static_cast<int>(cols.size()))
            throw ParseError(path + ":" + std::to_string(line_no) + ": wrong column count");
        try {
            std::size_t pos = 0;
            emb.ids.push_back(std::stol(parts[0], &pos));
            int at = 1;
            if (has_labels) emb.labels.push_back(std::stoi(parts[at++]));
            for (int j = 0; j < d; ++j) values.push_back(std::stod(parts[at + j]));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": malformed value");
        }
    }
    if (!emb.ids.empty()) {
        emb.vectors = Tensor(static_cast<int>(emb.ids.size()), d);
        std::copy(values.begin(), values.end(), emb.vectors.data());
    }
    emb.validate();
    return emb;
}

}  // namespace igcl
