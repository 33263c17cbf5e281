#pragma once

#include <vector>

#include "igcl/tensor.hpp"

namespace igcl {

struct KmeansResult {
    std::vector<int> assignments;
    Tensor centroids;
    double inertia = 0.0;
};

// Lloyd's algorithm with k-means++ seeding; best of `restarts` by inertia
KmeansResult kmeans(const Tensor& x, int k, int restarts, Rng& rng, int max_iters = 100);

struct ClusteringScores {
    double acc = 0.0;  // best one-to-one mapping accuracy (Hungarian)
    double nmi = 0.0;  // arithmetic-mean normalization
    double ari = 0.0;
};

ClusteringScores clustering_metrics(const std::vector<int>& pred, const std::vector<int>& truth);

// max-weight one-to-one assignment on a square cost matrix (returns the
// column matched to each row); used for Hungarian cluster accuracy
std::vector<int> hungarian_max(const std::vector<std::vector<double>>& weight);

// Spearman rank correlation with midrank ties
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// ordinary least squares R^2 of y on x
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace igcl
