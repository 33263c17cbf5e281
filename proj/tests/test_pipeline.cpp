#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <set>

#include "igcl/pipeline.hpp"
#include "igcl/presets.hpp"

using namespace igcl;

namespace {

Graph desk_graph(std::uint64_t seed = 7) {
    Rng rng(seed);
    return synth_sbm({25, 25}, 0.15, 0.02, 6, 1.0, 0.8, rng);
}

TrainConfig desk_config() {
    TrainConfig cfg;
    cfg.level = TaskLevel::node;
    cfg.epochs = 50;
    cfg.batch_size = 20;
    cfg.emb_size = 16;
    cfg.backbone.emb_dim = 16;
    cfg.vgae_hidden = 16;
    cfg.lr = 1e-3;
    cfg.seed = 7;
    return cfg;
}

GraphSet two_family_set(int n = 20, std::uint64_t seed = 11) {
    Rng rng(seed);
    GraphSet gs;
    for (int i = 0; i < n; ++i) {
        Graph g;
        if (i % 2 == 0) {
            g = synth_sbm({4, 4}, 0.9, 0.05, 4, 1.0, 0.5, rng);
            g.graph_label = 0;
        } else {
            g = synth_sbm({8}, 0.35, 0.0, 4, 1.0, 0.5, rng);
            g.graph_label = 1;
        }
        gs.graphs.push_back(std::move(g));
    }
    return gs;
}

// separable point clouds, one per class, far apart
EmbeddingTable blob_table(int per_class, int classes, double spread, Rng& rng) {
    EmbeddingTable t;
    const int n = per_class * classes;
    t.vectors = Tensor(n, 3);
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) {
            const int r = c * per_class + i;
            t.ids.push_back(r);
            t.labels.push_back(c);
            t.vectors.at(r, 0) = 10.0 * c + spread * rng.normal();
            t.vectors.at(r, 1) = -5.0 * c + spread * rng.normal();
            t.vectors.at(r, 2) = spread * rng.normal();
        }
    return t;
}

}  // namespace

TEST_CASE("node training reduces the contrastive loss and is deterministic") {
    Graph g = desk_graph();
    TrainConfig cfg = desk_config();

    TrainResult a = train_node(g, cfg);
    REQUIRE(static_cast<int>(a.history.size()) == cfg.epochs);
    CHECK(a.embeddings.size() == g.num_nodes);
    CHECK(a.embeddings.vectors.cols() == cfg.emb_size);
    CHECK(a.embeddings.has_labels());
    CHECK(a.history.back().icl_loss < a.history.front().icl_loss);
    for (const EpochLog& e : a.history) {
        CHECK(std::isfinite(e.vgae_loss));
        CHECK(std::isfinite(e.icl_loss));
    }

    TrainResult b = train_node(g, cfg);
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].vgae_loss == b.history[i].vgae_loss);
        CHECK(a.history[i].icl_loss == b.history[i].icl_loss);
    }
    for (int r = 0; r < a.embeddings.vectors.rows(); ++r)
        for (int c = 0; c < a.embeddings.vectors.cols(); ++c)
            CHECK(a.embeddings.vectors.at(r, c) == b.embeddings.vectors.at(r, c));
}

TEST_CASE("learning-rate schedule decays multiplicatively") {
    Graph g = desk_graph();
    TrainConfig cfg = desk_config();
    cfg.epochs = 4;
    cfg.lr_step = 0.5;
    TrainResult r = train_node(g, cfg);
    for (int e = 0; e < 4; ++e)
        CHECK(r.history[e].lr == doctest::Approx(cfg.lr * std::pow(0.5, e)).epsilon(1e-12));
}

TEST_CASE("config validation rejects bad settings") {
    TrainConfig cfg = desk_config();
    cfg.tau = 0.0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg = desk_config();
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg = desk_config();
    cfg.batch_size = 1;
    CHECK_THROWS_AS(cfg.validate(), UsageError);

    Graph g = desk_graph();
    cfg = desk_config();
    cfg.batch_size = g.num_nodes + 1;
    CHECK_THROWS_AS(train_node(g, cfg), UsageError);
    cfg = desk_config();
    cfg.level = TaskLevel::graph;
    CHECK_THROWS_AS(train_node(g, cfg), UsageError);
}

TEST_CASE("graph training reduces the contrastive loss") {
    GraphSet gs = two_family_set();
    TrainConfig cfg;
    cfg.level = TaskLevel::graph;
    cfg.epochs = 10;
    cfg.batch_size = 8;
    cfg.emb_size = 8;
    cfg.backbone.kind = BackboneKind::gin;
    cfg.backbone.emb_dim = 8;
    cfg.vgae_hidden = 8;
    cfg.seed = 3;
    TrainResult r = train_graph(gs, cfg);
    REQUIRE(static_cast<int>(r.history.size()) == cfg.epochs);
    CHECK(r.embeddings.size() == gs.num_graphs());
    CHECK(r.history.back().icl_loss < r.history.front().icl_loss);

    // leftover batch of one graph is skipped, not fatal
    GraphSet odd = two_family_set(5, 21);
    cfg.batch_size = 2;
    cfg.epochs = 2;
    TrainResult r2 = train_graph(odd, cfg);
    CHECK(r2.embeddings.size() == 5);
}

TEST_CASE("linear probe separates blobs and degrades to chance on noise") {
    Rng rng(42);
    EmbeddingTable emb = blob_table(40, 3, 0.3, rng);
    Rng prng(1);
    double acc = evaluate_probe(emb, prng);
    // checkpoint averaging keeps the earliest saturated epochs, so a point or
    // two near the boundary may flip; well-separated blobs stay >= 0.95
    CHECK(acc >= 0.95);

    // shuffled labels: accuracy near 1/C
    Rng rng2(43);
    EmbeddingTable noise = blob_table(100, 2, 0.3, rng2);
    for (int i = 0; i < noise.size(); ++i)
        noise.labels[i] = static_cast<int>(rng2.below(2));
    Rng prng2(2);
    double acc2 = evaluate_probe(noise, prng2);
    CHECK(acc2 > 0.5 - 0.15);
    CHECK(acc2 < 0.5 + 0.15);

    // a single represented class cannot be probed
    EmbeddingTable one = blob_table(20, 1, 0.3, rng);
    Rng prng3(3);
    CHECK_THROWS_AS(evaluate_probe(one, prng3), UsageError);
}

TEST_CASE("k-fold splits partition the indices and score one-hot codes perfectly") {
    Rng rng(5);
    std::vector<Split> folds = kfold_indices(23, 5, rng);
    REQUIRE(folds.size() == 5);
    std::set<int> seen;
    for (const Split& f : folds)
        for (int i : f.test) {
            CHECK(seen.count(i) == 0);
            seen.insert(i);
        }
    CHECK(static_cast<int>(seen.size()) == 23);

    // one-hot class codes: any fold classifies exactly
    EmbeddingTable emb;
    for (int i = 0; i < 30; ++i) {
        emb.ids.push_back(i);
        emb.labels.push_back(i % 3);
    }
    emb.vectors = Tensor::zeros(30, 3);
    for (int i = 0; i < 30; ++i) emb.vectors.at(i, i % 3) = 1.0;
    Rng krng(6);
    KfoldResult kr = kfold_probe(emb, 5, default_c_grid(), krng);
    CHECK(kr.mean_accuracy == doctest::Approx(1.0));
    CHECK(kr.excluded_folds.empty());
    for (double c : kr.chosen_c) {
        bool in_grid = false;
        for (double g : default_c_grid()) in_grid = in_grid || c == g;
        CHECK(in_grid);
    }
}

TEST_CASE("checkpoint weight averaging") {
    Tensor w = Tensor::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    Tensor v = Tensor::from_rows({{-1.0, -2.0}, {-3.0, -4.0}});

    // identical snapshots average to themselves
    Tensor avg = average_top_checkpoints({w, w, w}, {0.5, 0.6, 0.7}, 3);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(avg.at(r, c) == w.at(r, c));

    // top_k = 1 picks the best epoch; ties prefer the earlier one
    Tensor best = average_top_checkpoints({w, v}, {0.9, 0.2}, 1);
    CHECK(best.at(0, 0) == 1.0);
    Tensor tie = average_top_checkpoints({w, v}, {0.9, 0.9}, 1);
    CHECK(tie.at(0, 0) == 1.0);

    // opposite snapshots cancel
    Tensor zero = average_top_checkpoints({w, v}, {0.9, 0.9}, 2);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(zero.at(r, c) == 0.0);

    // fewer snapshots than requested uses all of them
    Tensor all = average_top_checkpoints({w}, {0.9}, 5);
    CHECK(all.at(1, 1) == 4.0);
}

TEST_CASE("embedding CSV round trip is bit-exact") {
    Rng rng(9);
    EmbeddingTable emb;
    emb.vectors = normal_init(7, 4, 1.0, rng);
    emb.vectors.set_requires_grad(false);
    for (int i = 0; i < 7; ++i) {
        emb.ids.push_back(100 + i);
        emb.labels.push_back(i % 2);
    }
    const std::string path = "roundtrip_embeddings.csv";
    export_embeddings(emb, path);
    EmbeddingTable back = import_embeddings(path);
    REQUIRE(back.size() == 7);
    CHECK(back.ids == emb.ids);
    CHECK(back.labels == emb.labels);
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 4; ++c) CHECK(back.vectors.at(r, c) == emb.vectors.at(r, c));
    std::remove(path.c_str());
}

TEST_CASE("ablation suite produces the four strategies in order") {
    Graph g = desk_graph();
    TrainConfig cfg = desk_config();
    cfg.epochs = 15;
    std::vector<AblationRow> rows = ablation_suite(g, cfg, 2);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].strategy == ContrastStrategy::noise);
    CHECK(rows[1].strategy == ContrastStrategy::vgae_only);
    CHECK(rows[2].strategy == ContrastStrategy::explicit_cl);
    CHECK(rows[3].strategy == ContrastStrategy::icl);
    for (const AblationRow& r : rows) {
        CHECK(r.per_seed.size() == 2);
        CHECK(r.mean_accuracy >= 0.0);
        CHECK(r.mean_accuracy <= 1.0);
        double m = (r.per_seed[0] + r.per_seed[1]) / 2.0;
        CHECK(r.mean_accuracy == doctest::Approx(m));
    }
}

TEST_CASE("sensitivity rows are sorted and snapshots clear their targets") {
    Graph g = desk_graph(31);
    TrainConfig cfg = desk_config();
    cfg.epochs = 20;
    cfg.vgae_mode = VgaeMode::pretrained;
    std::vector<SensitivityRow> rows = sensitivity_study(g, cfg, {0.2, 0.4, 0.6}, 2000);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].target > rows[i - 1].target);
    for (const SensitivityRow& r : rows)
        if (r.reached) {
            CHECK(r.recon_accuracy >= r.target);
            CHECK(r.epoch >= 0);
            CHECK(r.probe_accuracy > 0.0);
        }
    CHECK(rows[0].reached);

    TrainConfig bad = desk_config();
    CHECK_THROWS_AS(sensitivity_study(g, bad), UsageError);
}

TEST_CASE("presets cover the published tables and map to runnable configs") {
    const char* names[] = {"mutag", "nci1",     "proteins", "collab", "imdb-b", "imdb-m", "cora",
                           "citeseer", "pubmed", "photo",   "computers", "sbm",  "sbm-graphs"};
    for (const char* n : names) {
        const Preset* p = find_preset(n);
        REQUIRE_MESSAGE(p != nullptr, n);
        TrainConfig cfg = p->to_config();
        CHECK_NOTHROW(cfg.validate());
    }
    CHECK(find_preset("MUTAG") != nullptr);  // case-insensitive
    CHECK(find_preset("unknown-set") == nullptr);

    const Preset* cora = find_preset("cora");
    CHECK(cora->to_config().level == TaskLevel::node);
    CHECK(cora->to_config().backbone.kind == BackboneKind::gcn);
    const Preset* citeseer = find_preset("citeseer");
    CHECK(citeseer->printed_backbone == "GAT");
    CHECK(citeseer->to_config().backbone.kind == BackboneKind::gcn);
    const Preset* mutag = find_preset("mutag");
    CHECK(mutag->to_config().level == TaskLevel::graph);
    CHECK(mutag->to_config().backbone.kind == BackboneKind::gin);
    CHECK(mutag->to_config().projection == ProjectionKind::skip);
}
