#pragma once

#include <string>
#include <vector>

#include "igcl/tensor.hpp"

namespace igcl {

// Frozen embeddings handed to the evaluation stage: one row per id.
struct EmbeddingTable {
    std::vector<long> ids;
    Tensor vectors;           // n x D
    std::vector<int> labels;  // empty when absent

    int size() const { return static_cast<int>(ids.size()); }
    bool has_labels() const { return !labels.empty(); }
    void validate() const;  // throws on row/id/label count mismatch
    EmbeddingTable select(const std::vector<int>& idx) const;
};

enum class ProbeLoss { logistic, hinge };
ProbeLoss probe_loss_from_string(const std::string& s);

// Linear classifier on frozen embeddings. Weights are (D+1) x C with a bias
// row appended to the inputs. Multinomial softmax cross-entropy or
// one-vs-rest hinge, trained by Adam with l2 as weight decay.
struct ProbeResult {
    Tensor weights;  // averaged over the best validation checkpoints
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::vector<double> val_history;  // per training epoch
};

ProbeResult linear_probe(const EmbeddingTable& train, const EmbeddingTable& val,
                         const EmbeddingTable& test, ProbeLoss loss_kind, double l2, int epochs,
                         double lr, Rng& rng, int top_k = 5);

double probe_accuracy(const Tensor& weights, const EmbeddingTable& on);

// elementwise mean of the weight snapshots from the top_k epochs by
// validation accuracy; ties prefer the earlier epoch; fewer snapshots than
// top_k uses all of them (with a warning)
Tensor average_top_checkpoints(const std::vector<Tensor>& weights,
                               const std::vector<double>& val_accuracy, int top_k = 5);

struct KfoldResult {
    double mean_accuracy = 0.0;
    double sd_accuracy = 0.0;
    std::vector<double> fold_accuracies;  // only the folds that counted
    std::vector<int> excluded_folds;      // training part missed a class
    std::vector<double> chosen_c;         // per counted fold
};

// k-fold cross-validation of a linear classifier; the regularizer C is
// selected per fold on a nested 80/20 split of the training part, l2 = 1/C
KfoldResult kfold_probe(const EmbeddingTable& emb, int k, const std::vector<double>& c_grid,
                        Rng& rng, ProbeLoss loss_kind = ProbeLoss::hinge, int epochs = 100,
                        double lr = 0.1);

std::vector<double> default_c_grid();  // {1e-3, 1e-2, ..., 1e3}

// CSV: header "id,label,v0..v{D-1}" (label column present iff labels are);
// %.17g serialization makes the round trip bit-exact
void export_embeddings(const EmbeddingTable& emb, const std::string& path);
EmbeddingTable import_embeddings(const std::string& path);

}  // namespace igcl
