// End-to-end acceptance gate: twelve checks spanning the analytic bound, the
// encoder, the training pipeline and the command-line contract. Prints one
// PASS/FAIL line per check and exits nonzero when any of them fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "igcl/metrics.hpp"
#include "igcl/pipeline.hpp"
#include "igcl/presets.hpp"
#include "igcl/probe.hpp"
#include "igcl/verify.hpp"

using namespace igcl;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool passed, const std::string& detail) {
    std::printf("criterion %2d %-28s %s  %s\n", idx, name.c_str(), passed ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!passed) ++failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// the shared desk-scale blocks graph; feature_shift controls how informative
// the raw features are
Graph bench_graph(double feature_shift, std::uint64_t seed) {
    Rng rng(seed);
    return synth_sbm({50, 50, 50}, 0.10, 0.01, 8, feature_shift, 1.0, rng);
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// ---- 1-6: analytic property suite ---------------------------------------

std::vector<CheckResult> property_suite;

bool suite_check(const std::string& name, std::string& detail) {
    for (const CheckResult& r : property_suite)
        if (r.name == name) {
            detail = r.detail;
            return r.passed;
        }
    detail = "check missing from suite";
    return false;
}

bool suite_prefix_all(const std::string& prefix, std::string& detail) {
    int n = 0;
    for (const CheckResult& r : property_suite)
        if (r.name.rfind(prefix, 0) == 0) {
            ++n;
            if (!r.passed) {
                detail = r.name + ": " + r.detail;
                return false;
            }
        }
    detail = std::to_string(n) + " gradient checks, max relative error < 1e-5";
    return n > 0;
}

// ---- 7: link reconstruction on the karate club ---------------------------

void criterion_link_reconstruction() {
    const auto t0 = std::chrono::steady_clock::now();
    Graph g = karate_club();
    Tensor x = Tensor::identity(g.num_nodes);
    Rng rng(7);
    VgaeParams params = VgaeParams::init(g.num_nodes, 32, 16, rng);
    Adam opt(params.parameters(), 0.01);
    Tensor a_hat = normalized_adjacency(g);
    std::vector<double> losses;
    LatentDistribution dist;
    for (int e = 0; e < 200; ++e) {
        opt.zero_grad();
        dist = encode(a_hat, x, params);
        Tensor h = sample_latent(dist, rng);
        Tensor loss = elbo_loss(g, dist, h);
        losses.push_back(loss.item());
        backward(loss);
        opt.step();
    }
    dist = encode(a_hat, x, params);
    ReconMetrics m = recon_metrics(dist, g);
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << "auc=" << m.auc << " loss " << losses[0] << " -> " << losses[9] << " -> "
      << losses.back() << " in " << secs << "s";
    const bool ok = m.auc_defined && m.auc >= 0.80 && losses[9] < losses[0] && secs < 30.0;
    report(7, "link_reconstruction", ok, d.str());
}

// ---- 8: end-to-end pipeline beats raw features ---------------------------

void criterion_pipeline_accuracy() {
    const auto t0 = std::chrono::steady_clock::now();
    TrainConfig cfg = find_preset("sbm")->to_config();
    std::vector<double> learned, raw;
    for (int s = 0; s < 10; ++s) {
        Graph g = bench_graph(1.0, 1234 + s);
        cfg.seed = static_cast<std::uint64_t>(s);
        TrainResult res = train_node(g, cfg);
        Rng probe_rng(cfg.seed * 7919 + 13);
        learned.push_back(evaluate_probe(res.embeddings, probe_rng));

        EmbeddingTable raw_emb;
        raw_emb.vectors = g.features;
        raw_emb.labels = g.node_labels;
        for (int i = 0; i < g.num_nodes; ++i) raw_emb.ids.push_back(i);
        Rng raw_rng(cfg.seed * 7919 + 13);
        raw.push_back(evaluate_probe(raw_emb, raw_rng));
    }
    const double m_learned = mean(learned), m_raw = mean(raw);
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << "mean=" << m_learned << " raw=" << m_raw << " over 10 seeds in " << secs << "s";
    const bool ok = m_learned >= 0.85 && m_learned >= m_raw + 0.05 && secs < 300.0;
    report(8, "pipeline_accuracy", ok, d.str());
}

// ---- 9: strategy comparison ----------------------------------------------

void criterion_strategy_ordering() {
    Graph g = bench_graph(1.0, 42);
    TrainConfig cfg = find_preset("sbm")->to_config();
    cfg.seed = 100;
    std::vector<AblationRow> rows = ablation_suite(g, cfg, 10);
    double icl_acc = 0.0, noise_acc = 0.0;
    for (const AblationRow& r : rows) {
        if (r.strategy == ContrastStrategy::icl) icl_acc = r.mean_accuracy;
        if (r.strategy == ContrastStrategy::noise) noise_acc = r.mean_accuracy;
    }
    std::ostringstream d;
    d << "icl=" << icl_acc << " noise=" << noise_acc << " (" << rows.size() << " strategies)";
    report(9, "strategy_ordering", rows.size() == 4 && icl_acc >= noise_acc, d.str());
}

// ---- 10: reconstruction level tracks downstream quality ------------------

void criterion_sensitivity_correlation() {
    const auto t0 = std::chrono::steady_clock::now();
    TrainConfig cfg = find_preset("sbm")->to_config();
    cfg.vgae_mode = VgaeMode::pretrained;
    std::vector<double> per_seed;
    for (int s = 0; s < 10; ++s) {
        Graph g = bench_graph(0.3, 2024);
        cfg.seed = static_cast<std::uint64_t>(s);
        std::vector<SensitivityRow> rows = sensitivity_study(g, cfg);
        std::vector<double> level, quality;
        for (const SensitivityRow& r : rows)
            if (r.reached) {
                level.push_back(r.recon_accuracy);
                quality.push_back(r.probe_accuracy);
            }
        if (level.size() >= 3) per_seed.push_back(spearman(level, quality));
    }
    const double m = per_seed.empty() ? -1.0 : mean(per_seed);
    std::ostringstream d;
    d << "mean spearman=" << m << " over " << per_seed.size() << " seeds in "
      << seconds_since(t0) << "s";
    report(10, "sensitivity_correlation", per_seed.size() >= 8 && m > 0.0, d.str());
}

// ---- 11: byte-identical reruns via the command line ----------------------

std::string slurp(const std::string& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void criterion_determinism() {
    const std::string base = "/tmp/igcl_acceptance_det";
    int rm_rc = std::system(("rm -rf " + base).c_str());
    const std::string cli = IGCL_CLI_PATH;
    const std::string args = " train --preset sbm --seed 41 --set epochs=20 --out ";
    int rc1 = std::system((cli + args + base + "/a > /dev/null 2>&1").c_str());
    int rc2 = std::system((cli + args + base + "/b > /dev/null 2>&1").c_str());
    const std::string ea = slurp(base + "/a/embeddings.csv");
    const std::string eb = slurp(base + "/b/embeddings.csv");
    const bool ok = rc1 == 0 && rc2 == 0 && !ea.empty() && ea == eb &&
                    slurp(base + "/a/history.csv") == slurp(base + "/b/history.csv");
    std::ostringstream d;
    d << "two seed-41 runs, " << ea.size() << " embedding bytes compared";
    report(11, "determinism", ok, d.str());
    rm_rc = std::system(("rm -rf " + base).c_str());
    (void)rm_rc;
}

// ---- 12: preset tables match the published values ------------------------

struct GraphRow {
    const char* name;
    const char* projection;
    int epochs, layers, emb, batch;
    double lr, l2, tau;
};
struct NodeRow {
    const char* name;
    const char* backbone;
    int epochs, emb;
    double dropout, lr, lr_step, l2, tau;
};

void criterion_preset_fidelity() {
    const GraphRow graph_rows[] = {
        {"mutag", "Skip", 100, 5, 256, 16, 5e-4, 5e-3, 0.01},
        {"nci1", "Linear", 100, 5, 256, 32, 1e-4, 5e-3, 3.54},
        {"proteins", "Linear", 20, 2, 256, 64, 1e-4, 1e-2, 5.0},
        {"collab", "Linear", 20, 8, 256, 128, 5e-4, 1e-2, 1.98},
        {"imdb-b", "Linear", 20, 2, 512, 16, 1e-4, 5e-3, 5.0},
        {"imdb-m", "Skip", 100, 8, 128, 64, 5e-4, 1e-2, 10.0},
    };
    const NodeRow node_rows[] = {
        {"cora", "GCN", 300, 256, 0.5, 1e-4, 0.0, 5e-3, 1.0},
        {"citeseer", "GAT", 300, 512, 0.5, 5e-4, 0.85, 1e-2, 5.0},
        {"pubmed", "GCN", 1000, 128, 0.5, 1e-4, 0.0, 1e-4, 4.7},
        {"photo", "GAT", 600, 256, 0.5, 5e-3, 0.85, 5e-3, 1.0},
        {"computers", "GAT", 600, 256, 0.5, 1e-3, 0.85, 5e-3, 1.0},
    };
    int mismatches = 0;
    auto miss = [&](const char* name, const char* field) {
        std::fprintf(stderr, "preset %s: field %s mismatch\n", name, field);
        ++mismatches;
    };
    for (const GraphRow& r : graph_rows) {
        const Preset* p = find_preset(r.name);
        if (p == nullptr || p->level != TaskLevel::graph) {
            miss(r.name, "presence/level");
            continue;
        }
        if (p->printed_projection != r.projection) miss(r.name, "projection");
        if (p->num_epochs != r.epochs) miss(r.name, "epochs");
        if (p->num_layers != r.layers) miss(r.name, "layers");
        if (p->emb_size != r.emb) miss(r.name, "emb");
        if (p->batch_size != r.batch) miss(r.name, "batch");
        if (p->lr != r.lr) miss(r.name, "lr");
        if (p->l2 != r.l2) miss(r.name, "l2");
        if (p->tau != r.tau) miss(r.name, "tau");
    }
    for (const NodeRow& r : node_rows) {
        const Preset* p = find_preset(r.name);
        if (p == nullptr || p->level != TaskLevel::node) {
            miss(r.name, "presence/level");
            continue;
        }
        if (p->printed_backbone != r.backbone) miss(r.name, "backbone");
        if (p->num_epochs != r.epochs) miss(r.name, "epochs");
        if (p->emb_size != r.emb) miss(r.name, "emb");
        if (p->dropout != r.dropout) miss(r.name, "dropout");
        if (p->lr != r.lr) miss(r.name, "lr");
        if (p->lr_step != r.lr_step) miss(r.name, "lr_step");
        if (p->l2 != r.l2) miss(r.name, "l2");
        if (p->tau != r.tau) miss(r.name, "tau");
        TrainConfig cfg = p->to_config();
        if (cfg.backbone.kind != BackboneKind::gcn) miss(r.name, "runtime backbone");
    }
    std::ostringstream d;
    d << "11 published rows checked, " << mismatches << " mismatches";
    report(12, "preset_fidelity", mismatches == 0, d.str());
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();

    VerifyOptions opts;
    property_suite = run_verification(opts);
    write_verify_report(property_suite, "verify_report.json");

    std::string d;
    bool ok = suite_check("bound_dominance", d);
    report(1, "bound_dominance", ok, d);
    ok = suite_check("rewrite_exactness", d);
    report(2, "rewrite_exactness", ok, d);
    ok = suite_check("sigma_collapse", d);
    report(3, "sigma_collapse", ok, d);
    ok = suite_check("temperature_limit", d);
    report(4, "temperature_limit", ok, d);
    ok = suite_prefix_all("grad_", d);
    report(5, "gradient_exactness", ok, d);
    ok = suite_check("complexity_fit", d);
    report(6, "complexity_fit", ok, d);

    criterion_link_reconstruction();
    criterion_pipeline_accuracy();
    criterion_strategy_ordering();
    criterion_sensitivity_correlation();
    criterion_determinism();
    criterion_preset_fidelity();

    std::printf("%d of 12 criteria passed in %.1fs\n", 12 - failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
