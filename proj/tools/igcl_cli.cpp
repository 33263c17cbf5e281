#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "igcl/metrics.hpp"
#include "igcl/pipeline.hpp"
#include "igcl/presets.hpp"
#include "igcl/probe.hpp"
#include "igcl/verify.hpp"

using nlohmann::json;
using namespace igcl;

namespace {

// exit codes: 0 success, 1 verification failure, 2 usage/config, 3 numeric
constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

std::string iso_timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string git_describe() {
    FILE* p = popen("git describe --always --dirty 2>/dev/null", "r");
    if (!p) return "unknown";
    char buf[128] = {0};
    std::string out;
    if (fgets(buf, sizeof buf, p)) out = buf;
    pclose(p);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return out.empty() ? "unknown" : out;
}

int env_threads() {
    const char* v = std::getenv("IGCL_THREADS");
    if (v == nullptr) return 1;
    try {
        return std::max(1, std::stoi(v));
    } catch (const std::exception&) {
        return 1;
    }
}

json config_to_json(const TrainConfig& cfg) {
    return json{{"level", to_string(cfg.level)},
                {"epochs", cfg.epochs},
                {"vgae_inner_steps", cfg.vgae_inner_steps},
                {"batch_size", cfg.batch_size},
                {"emb_size", cfg.emb_size},
                {"backbone",
                 {{"kind", to_string(cfg.backbone.kind)},
                  {"num_layers", cfg.backbone.num_layers},
                  {"hidden_dim", cfg.backbone.hidden_dim},
                  {"gin_epsilon", cfg.backbone.gin_epsilon},
                  {"dropout", cfg.backbone.dropout_p}}},
                {"projection", to_string(cfg.projection)},
                {"tau", cfg.tau},
                {"lr", cfg.lr},
                {"lr_step", cfg.lr_step},
                {"weight_decay", cfg.weight_decay},
                {"vgae_lr", cfg.vgae_lr},
                {"vgae_hidden", cfg.vgae_hidden},
                {"vgae_pretrain_epochs", cfg.vgae_pretrain_epochs},
                {"vgae_mode", to_string(cfg.vgae_mode)},
                {"seed", cfg.seed}};
}

void apply_config_field(TrainConfig& cfg, const std::string& path, const json& v) {
    auto bad_type = [&](const char* want) {
        throw UsageError("config field " + path + ": expected " + want);
    };
    auto as_int = [&]() {
        if (!v.is_number_integer()) bad_type("integer");
        return v.get<int>();
    };
    auto as_num = [&]() {
        if (!v.is_number()) bad_type("number");
        return v.get<double>();
    };
    auto as_str = [&]() {
        if (!v.is_string()) bad_type("string");
        return v.get<std::string>();
    };
    if (path == "level") cfg.level = task_level_from_string(as_str());
    else if (path == "epochs") cfg.epochs = as_int();
    else if (path == "vgae_inner_steps") cfg.vgae_inner_steps = as_int();
    else if (path == "batch_size") cfg.batch_size = as_int();
    else if (path == "emb_size") cfg.emb_size = as_int();
    else if (path == "backbone.kind") cfg.backbone.kind = backbone_kind_from_string(as_str());
    else if (path == "backbone.num_layers") cfg.backbone.num_layers = as_int();
    else if (path == "backbone.hidden_dim") cfg.backbone.hidden_dim = as_int();
    else if (path == "backbone.gin_epsilon") cfg.backbone.gin_epsilon = as_num();
    else if (path == "backbone.dropout") cfg.backbone.dropout_p = as_num();
    else if (path == "projection") cfg.projection = projection_kind_from_string(as_str());
    else if (path == "tau") cfg.tau = as_num();
    else if (path == "lr") cfg.lr = as_num();
    else if (path == "lr_step") cfg.lr_step = as_num();
    else if (path == "weight_decay") cfg.weight_decay = as_num();
    else if (path == "vgae_lr") cfg.vgae_lr = as_num();
    else if (path == "vgae_hidden") cfg.vgae_hidden = as_int();
    else if (path == "vgae_pretrain_epochs") cfg.vgae_pretrain_epochs = as_int();
    else if (path == "vgae_mode") cfg.vgae_mode = vgae_mode_from_string(as_str());
    else if (path == "seed") {
        if (!v.is_number_integer() && !v.is_number_unsigned()) bad_type("integer");
        cfg.seed = v.get<std::uint64_t>();
    } else {
        throw UsageError("unknown config field: " + path);
    }
}

void apply_config_json(TrainConfig& cfg, const json& j, const std::string& prefix = "") {
    if (!j.is_object()) throw UsageError("config: expected a JSON object at " +
                                         (prefix.empty() ? std::string("top level") : prefix));
    for (const auto& [key, value] : j.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object()) apply_config_json(cfg, value, path);
        else apply_config_field(cfg, path, value);
    }
}

// dotted-path override "tau=0.5" or "backbone.num_layers=3"
void apply_override(TrainConfig& cfg, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("override must look like key=value: " + kv);
    const std::string path = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json v;
    try {
        v = json::parse(raw);
    } catch (const json::exception&) {
        v = raw;  // bare strings like vgae_mode=pretrained
    }
    apply_config_field(cfg, path, v);
}

struct TrainSetup {
    std::string preset_name;
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir = "run";
    std::string edges_path, features_path, labels_path, manifest_path;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--preset", preset_name, "named preset (" + preset_names_joined() + ")");
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--set", overrides, "dotted-path override key=value")->take_all();
        cmd->add_option("--seed", seed, "run seed")->each([this](const std::string&) {
            seed_given = true;
        });
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--edges", edges_path, "edge-list CSV (node level)");
        cmd->add_option("--features", features_path, "feature CSV");
        cmd->add_option("--labels", labels_path, "label CSV");
        cmd->add_option("--manifest", manifest_path, "graph-set manifest JSON (graph level)");
    }

    TrainConfig resolve() const {
        TrainConfig cfg;
        if (!preset_name.empty()) {
            const Preset* p = find_preset(preset_name);
            if (p == nullptr)
                throw UsageError("unknown preset: " + preset_name + " (valid: " +
                                 preset_names_joined() + ")");
            cfg = p->to_config();
        }
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw UsageError("cannot open config: " + config_path);
            json j;
            try {
                j = json::parse(f);
            } catch (const json::exception& e) {
                throw UsageError("config parse error in " + config_path + ": " + e.what());
            }
            apply_config_json(cfg, j);
        }
        for (const std::string& kv : overrides) apply_override(cfg, kv);
        if (seed_given) cfg.seed = seed;
        cfg.validate();
        return cfg;
    }

    Graph load_node_graph(const TrainConfig& cfg) const {
        if (!edges_path.empty()) return load_graph(edges_path, features_path, labels_path);
        // no dataset given: deterministic synthetic blocks bed from the seed
        Rng rng(cfg.seed ^ 0x5b5ce199u);
        return synth_sbm({50, 50, 50}, 0.10, 0.01, 8, 1.0, 1.0, rng);
    }

    GraphSet load_graph_set(const TrainConfig& cfg) const {
        if (!manifest_path.empty()) return load_graphset_manifest(manifest_path);
        // two synthetic families: community pairs vs uniform graphs
        Rng rng(cfg.seed ^ 0x2c9277b5u);
        GraphSet gs;
        for (int i = 0; i < 20; ++i) {
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
};

void write_manifest(const std::string& path, const TrainConfig& cfg, const json& extra) {
    json j;
    j["config"] = config_to_json(cfg);
    j["seed"] = cfg.seed;
    j["git"] = git_describe();
    j["threads"] = env_threads();
    for (const auto& [k, v] : extra.items()) j[k] = v;
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write manifest: " + path);
    f << j.dump(2) << "\n";
}

int cmd_train(const TrainSetup& setup) {
    TrainConfig cfg = setup.resolve();
    std::filesystem::create_directories(setup.out_dir);
    const std::string manifest_path = setup.out_dir + "/manifest.json";
    const std::string embeddings_path = setup.out_dir + "/embeddings.csv";
    const std::string history_path = setup.out_dir + "/history.csv";
    json extra{{"command", "train"},
               {"started", iso_timestamp()},
               {"outputs", {embeddings_path, history_path}}};
    write_manifest(manifest_path, cfg, extra);

    TrainResult res;
    if (cfg.level == TaskLevel::node) {
        Graph g = setup.load_node_graph(cfg);
        res = train_node(g, cfg);
    } else {
        GraphSet gs = setup.load_graph_set(cfg);
        res = train_graph(gs, cfg);
    }
    export_embeddings(res.embeddings, embeddings_path);
    save_history_csv(res.history, history_path);
    extra["finished"] = iso_timestamp();
    write_manifest(manifest_path, cfg, extra);
    std::cout << "wrote " << embeddings_path << " (" << res.embeddings.size() << " rows) and "
              << history_path << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& embeddings_path, const std::string& labels_path,
             const std::string& mode, const std::string& out_path, int k, std::uint64_t seed) {
    EmbeddingTable emb = import_embeddings(embeddings_path);
    if (!labels_path.empty()) {
        emb.labels = load_labels_csv(labels_path);
        emb.validate();
    }
    if (!emb.has_labels()) throw UsageError("eval: labels required (in the CSV or via --labels)");

    std::ofstream out(out_path);
    if (!out) throw UsageError("cannot write metrics: " + out_path);
    Rng rng(seed);
    if (mode == "probe") {
        double acc = evaluate_probe(emb, rng);
        std::printf("probe_accuracy %.6f\n", acc);
        out << "metric,value\nprobe_accuracy," << acc << "\n";
    } else if (mode == "kfold") {
        KfoldResult r = kfold_probe(emb, k, default_c_grid(), rng);
        std::printf("kfold_accuracy %.6f +- %.6f\n", r.mean_accuracy, r.sd_accuracy);
        out << "metric,mean,sd\nkfold_accuracy," << r.mean_accuracy << "," << r.sd_accuracy
            << "\n";
    } else if (mode == "cluster") {
        int classes = 0;
        for (int l : emb.labels) classes = std::max(classes, l + 1);
        KmeansResult km = kmeans(emb.vectors, classes, 8, rng);
        ClusteringScores s = clustering_metrics(km.assignments, emb.labels);
        std::printf("acc %.6f nmi %.6f ari %.6f\n", s.acc, s.nmi, s.ari);
        out << "metric,value\nacc," << s.acc << "\nnmi," << s.nmi << "\nari," << s.ari << "\n";
    } else {
        throw UsageError("unknown eval mode: " + mode + " (use probe, kfold or cluster)");
    }
    return kExitOk;
}

int cmd_verify(bool quick, const std::string& out_path, std::uint64_t seed) {
    VerifyOptions opts;
    opts.quick = quick;
    opts.seed = seed;
    std::vector<CheckResult> results = run_verification(opts);
    for (const CheckResult& r : results)
        std::printf("%-22s %s  margin=%.3g  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                    r.margin, r.detail.c_str());
    write_verify_report(results, out_path);
    if (!all_passed(results)) {
        for (const CheckResult& r : results)
            if (!r.passed) std::cerr << "verification failed: " << r.name << "\n";
        return kExitVerifyFail;
    }
    return kExitOk;
}

int cmd_ablate(const TrainSetup& setup, int num_seeds) {
    TrainConfig cfg = setup.resolve();
    if (cfg.level != TaskLevel::node)
        throw UsageError("ablate: node-level configs only");
    std::filesystem::create_directories(setup.out_dir);
    Graph g = setup.load_node_graph(cfg);
    std::vector<AblationRow> rows = ablation_suite(g, cfg, num_seeds);
    const std::string table_path = setup.out_dir + "/ablation.csv";
    save_ablation_csv(rows, table_path);
    for (const AblationRow& r : rows)
        std::printf("%-12s %.4f +- %.4f\n", to_string(r.strategy).c_str(), r.mean_accuracy,
                    r.sd_accuracy);
    std::cout << "wrote " << table_path << "\n";
    return kExitOk;
}

int cmd_sensitivity(const TrainSetup& setup) {
    TrainConfig cfg = setup.resolve();
    if (cfg.level != TaskLevel::node)
        throw UsageError("sensitivity: node-level configs only");
    cfg.vgae_mode = VgaeMode::pretrained;
    std::filesystem::create_directories(setup.out_dir);
    Graph g = setup.load_node_graph(cfg);
    std::vector<SensitivityRow> rows = sensitivity_study(g, cfg);
    const std::string table_path = setup.out_dir + "/sensitivity.csv";
    save_sensitivity_csv(rows, table_path);
    for (const SensitivityRow& r : rows)
        std::printf("target %.1f  reached=%d  recon_accuracy=%.3f  probe=%.4f\n", r.target,
                    r.reached ? 1 : 0, r.recon_accuracy, r.probe_accuracy);
    std::cout << "wrote " << table_path << "\n";
    return kExitOk;
}

int cmd_synth(const std::string& kind, const std::string& out_dir,
              const std::vector<int>& blocks, double p_in, double p_out, int feature_dim,
              double shift, double noise_sd, std::uint64_t seed) {
    std::filesystem::create_directories(out_dir);
    Graph g;
    if (kind == "karate") {
        g = karate_club();
    } else if (kind == "sbm") {
        if (blocks.empty()) throw UsageError("synth sbm: --blocks required");
        for (int b : blocks)
            if (b < 1) throw UsageError("synth sbm: block sizes must be positive");
        if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1)
            throw UsageError("synth sbm: probabilities must lie in [0, 1]");
        Rng rng(seed);
        g = synth_sbm(blocks, p_in, p_out, feature_dim, shift, noise_sd, rng);
    } else {
        throw UsageError("unknown synth kind: " + kind + " (use sbm or karate)");
    }
    save_edge_list(g, out_dir + "/edges.csv");
    if (g.features.defined()) save_features_csv(g.features, out_dir + "/features.csv");
    if (!g.node_labels.empty()) save_labels_csv(g.node_labels, out_dir + "/labels.csv");
    std::cout << "wrote " << out_dir << ": " << g.num_nodes << " nodes, " << g.num_edges()
              << " edges\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"implicit-augmentation graph contrastive learning"};
    app.require_subcommand(1);

    TrainSetup train_setup;
    CLI::App* train = app.add_subcommand("train", "train embeddings and export them");
    train_setup.add_options(train);

    std::string eval_embeddings, eval_labels, eval_mode = "probe", eval_out = "metrics.csv";
    int eval_k = 10;
    std::uint64_t eval_seed = 0;
    CLI::App* eval = app.add_subcommand("eval", "evaluate an embeddings CSV");
    eval->add_option("--embeddings", eval_embeddings, "embeddings CSV")->required();
    eval->add_option("--labels", eval_labels, "label CSV (when absent from the embeddings)");
    eval->add_option("--mode", eval_mode, "probe | kfold | cluster");
    eval->add_option("--out", eval_out, "metrics CSV path");
    eval->add_option("--k", eval_k, "folds for kfold mode");
    eval->add_option("--seed", eval_seed, "evaluation seed");

    bool verify_quick = false;
    std::string verify_out = "verify_report.json";
    std::uint64_t verify_seed = 12345;
    CLI::App* verify = app.add_subcommand("verify", "run the self-contained property suite");
    verify->add_flag("--quick", verify_quick, "20 batches and M=1e4 for the dominance check");
    verify->add_option("--out", verify_out, "report JSON path");
    verify->add_option("--seed", verify_seed, "suite seed");

    TrainSetup ablate_setup;
    int ablate_seeds = 10;
    CLI::App* ablate = app.add_subcommand("ablate", "compare the four training strategies");
    ablate_setup.add_options(ablate);
    ablate->add_option("--seeds", ablate_seeds, "number of repeated runs");

    TrainSetup sens_setup;
    CLI::App* sens = app.add_subcommand("sensitivity", "reconstruction-level sweep");
    sens_setup.add_options(sens);

    std::string synth_kind = "sbm", synth_out = "synth";
    std::vector<int> synth_blocks{50, 50, 50};
    double synth_pin = 0.10, synth_pout = 0.01, synth_shift = 1.0, synth_noise = 1.0;
    int synth_fdim = 8;
    std::uint64_t synth_seed = 0;
    CLI::App* synth = app.add_subcommand("synth", "write a synthetic dataset");
    synth->add_option("--kind", synth_kind, "sbm | karate");
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--blocks", synth_blocks, "block sizes")->delimiter(',');
    synth->add_option("--p-in", synth_pin, "within-block edge probability");
    synth->add_option("--p-out", synth_pout, "between-block edge probability");
    synth->add_option("--feature-dim", synth_fdim, "feature dimension");
    synth->add_option("--shift", synth_shift, "per-block feature mean shift");
    synth->add_option("--noise", synth_noise, "feature noise standard deviation");
    synth->add_option("--seed", synth_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*train) return cmd_train(train_setup);
        if (*eval) return cmd_eval(eval_embeddings, eval_labels, eval_mode, eval_out, eval_k,
                                   eval_seed);
        if (*verify) return cmd_verify(verify_quick, verify_out, verify_seed);
        if (*ablate) return cmd_ablate(ablate_setup, ablate_seeds);
        if (*sens) return cmd_sensitivity(sens_setup);
        if (*synth) return cmd_synth(synth_kind, synth_out, synth_blocks, synth_pin, synth_pout,
                                     synth_fdim, synth_shift, synth_noise, synth_seed);
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const TensorError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
