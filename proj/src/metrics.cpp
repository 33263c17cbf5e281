#include "igcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "igcl/graph.hpp"  // UsageError

namespace igcl {

static double sq_dist(const Tensor& x, int row, const Tensor& c, int crow) {
    double s = 0.0;
    for (int j = 0; j < x.cols(); ++j) {
        const double d = x.at(row, j) - c.at(crow, j);
        s += d * d;
    }
    return s;
}

static KmeansResult kmeans_once(const Tensor& x, int k, Rng& rng, int max_iters) {
    const int n = x.rows(), d = x.cols();
    Tensor centroids(k, d);
    // k-means++ seeding
    std::vector<double> dist(n, std::numeric_limits<double>::max());
    int first = static_cast<int>(rng.below(n));
    for (int j = 0; j < d; ++j) centroids.at(0, j) = x.at(first, j);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            dist[i] = std::min(dist[i], sq_dist(x, i, centroids, c - 1));
            total += dist[i];
        }
        int pick = n - 1;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += dist[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<int>(rng.below(n));
        }
        for (int j = 0; j < d; ++j) centroids.at(c, j) = x.at(pick, j);
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(x, i, centroids, 0);
            for (int c = 1; c < k; ++c) {
                const double dd = sq_dist(x, i, centroids, c);
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        // recompute centroids; empty clusters keep their previous position
        std::vector<int> counts(k, 0);
        Tensor fresh(k, d);
        for (int i = 0; i < n; ++i) {
            counts[assign[i]] += 1;
            for (int j = 0; j < d; ++j) fresh.at(assign[i], j) += x.at(i, j);
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (int j = 0; j < d; ++j) centroids.at(c, j) = fresh.at(c, j) / counts[c];
        }
    }
    KmeansResult res;
    res.assignments = std::move(assign);
    res.centroids = centroids;
    res.inertia = 0.0;
    for (int i = 0; i < n; ++i) res.inertia += sq_dist(x, i, centroids, res.assignments[i]);
    return res;
}

KmeansResult kmeans(const Tensor& x, int k, int restarts, Rng& rng, int max_iters) {
    if (k < 1 || k > x.rows()) throw UsageError("kmeans: need 1 <= k <= n");
    if (restarts < 1) throw UsageError("kmeans: restarts must be >= 1");
    KmeansResult best;
    best.inertia = std::numeric_limits<double>::max();
    for (int r = 0; r < restarts; ++r) {
        KmeansResult cur = kmeans_once(x, k, rng, max_iters);
        if (cur.inertia < best.inertia) best = std::move(cur);
    }
    return best;
}

// Kuhn-Munkres on the negated weights (standard O(n^3) potentials form)
std::vector<int> hungarian_max(const std::vector<std::vector<double>>& weight) {
    const int n = static_cast<int>(weight.size());
    // cost = -weight, 1-indexed working arrays
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::max());
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            int i0 = p[j0], j1 = 0;
            double delta = std::numeric_limits<double>::max();
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> match(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) match[p[j] - 1] = j - 1;
    return match;
}

static double entropy(const std::vector<double>& counts, double n) {
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) h -= (c / n) * std::log(c / n);
    return h;
}

ClusteringScores clustering_metrics(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.empty() || pred.size() != truth.size())
        throw UsageError("clustering_metrics: empty or mismatched inputs");
    const double n = static_cast<double>(pred.size());
    // compact label ids
    std::map<int, int> pid, tid;
    for (int p : pred) pid.emplace(p, static_cast<int>(pid.size()));
    for (int t : truth) tid.emplace(t, static_cast<int>(tid.size()));
    const int kp = static_cast<int>(pid.size());
    const int kt = static_cast<int>(tid.size());
    const int k = std::max(kp, kt);
    std::vector<std::vector<double>> conf(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < pred.size(); ++i) conf[pid[pred[i]]][tid[truth[i]]] += 1.0;

    ClusteringScores s;
    // Hungarian accuracy
    auto match = hungarian_max(conf);
    double hits = 0.0;
    for (int i = 0; i < k; ++i) hits += conf[i][match[i]];
    s.acc = hits / n;

    // NMI with arithmetic-mean normalization
    std::vector<double> row(k, 0.0), col(k, 0.0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            row[i] += conf[i][j];
            col[j] += conf[i][j];
        }
    double mi = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (conf[i][j] <= 0.0) continue;
            mi += (conf[i][j] / n) * std::log(n * conf[i][j] / (row[i] * col[j]));
        }
    const double hx = entropy(row, n), hy = entropy(col, n);
    s.nmi = (hx + hy) > 0.0 ? mi / (0.5 * (hx + hy)) : 1.0;

    // ARI by pair counting
    auto comb2 = [](double c) { return c * (c - 1.0) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (int i = 0; i < k; ++i) {
        sum_a += comb2(row[i]);
        sum_b += comb2(col[i]);
        for (int j = 0; j < k; ++j) sum_ij += comb2(conf[i][j]);
    }
    const double total = comb2(n);
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    s.ari = (max_index - expected) != 0.0 ? (sum_ij - expected) / (max_index - expected) : 1.0;
    return s;
}

static std::vector<double> midranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && x[order[j]] == x[order[i]]) ++j;
        const double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j - 1)) + 1.0;
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = r;
        i = j;
    }
    return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw UsageError("spearman: need >= 2 pairs");
    auto rx = midranks(x);
    auto ry = midranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx) * (rx[i] - mx);
        vy += (ry[i] - my) * (ry[i] - my);
    }
    if (vx == 0.0 || vy == 0.0) return 0.0;
    return cov / std::sqrt(vx * vy);
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) throw UsageError("linear_fit_r2: need >= 3 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return (sxy * sxy) / (sxx * syy);
}

}  // namespace igcl
