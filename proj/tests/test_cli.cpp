#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "igcl/probe.hpp"

// Exercises the installed command-line binary as a subprocess: exit codes,
// output files and the config override path.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(IGCL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("igcl_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& p) const { return (path / p).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("cli usage errors exit with code 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("train --preset no-such-preset --out /tmp/igcl_cli_nowhere") == 2);
    CHECK(run_cli("train --preset sbm --set tau=-3 --out /tmp/igcl_cli_nowhere") == 2);
    CHECK(run_cli("train --preset sbm --set not_a_field=1 --out /tmp/igcl_cli_nowhere") == 2);
    CHECK(run_cli("eval --embeddings /no/such/file.csv") == 2);
    CHECK(run_cli("synth --kind volcano --out /tmp/igcl_cli_nowhere") == 2);
}

TEST_CASE("synth writes a loadable dataset") {
    TempDir tmp;
    REQUIRE(run_cli("synth --kind karate --out " + (tmp / "kz")) == 0);
    CHECK(fs::exists(tmp / "kz/edges.csv"));
    CHECK(fs::exists(tmp / "kz/labels.csv"));

    REQUIRE(run_cli("synth --kind sbm --blocks 10,10 --p-in 0.5 --p-out 0.05 --seed 4 --out " +
                    (tmp / "sb")) == 0);
    CHECK(fs::exists(tmp / "sb/edges.csv"));
    CHECK(fs::exists(tmp / "sb/features.csv"));
    CHECK(fs::exists(tmp / "sb/labels.csv"));
}

TEST_CASE("train on a preset without datasets produces the output contract") {
    TempDir tmp;
    const std::string out = tmp / "run1";
    REQUIRE(run_cli("train --preset sbm --seed 1 --set epochs=5 --out " + out) == 0);
    REQUIRE(fs::exists(out + "/manifest.json"));
    REQUIRE(fs::exists(out + "/embeddings.csv"));
    REQUIRE(fs::exists(out + "/history.csv"));

    json manifest = json::parse(slurp(out + "/manifest.json"));
    CHECK(manifest["seed"] == 1);
    CHECK(manifest["config"]["epochs"] == 5);
    CHECK(manifest["config"]["level"] == "node");
    CHECK(manifest.contains("started"));
    CHECK(manifest.contains("finished"));

    igcl::EmbeddingTable emb = igcl::import_embeddings(out + "/embeddings.csv");
    CHECK(emb.size() == 150);
    CHECK(emb.has_labels());

    std::ifstream hist(out + "/history.csv");
    std::string header;
    std::getline(hist, header);
    CHECK(header == "epoch,vgae_loss,icl_loss,lr");
    int lines = 0;
    for (std::string line; std::getline(hist, line);) ++lines;
    CHECK(lines == 5);
}

TEST_CASE("train is byte-deterministic for a fixed seed") {
    TempDir tmp;
    const std::string a = tmp / "a", b = tmp / "b";
    REQUIRE(run_cli("train --preset sbm --seed 77 --set epochs=4 --out " + a) == 0);
    REQUIRE(run_cli("train --preset sbm --seed 77 --set epochs=4 --out " + b) == 0);
    CHECK(slurp(a + "/embeddings.csv") == slurp(b + "/embeddings.csv"));
    CHECK(slurp(a + "/history.csv") == slurp(b + "/history.csv"));
}

TEST_CASE("config file plus dotted overrides are honored") {
    TempDir tmp;
    const std::string cfg = tmp / "cfg.json";
    std::ofstream(cfg) << R"({"epochs": 3, "backbone": {"num_layers": 3}, "tau": 0.7})";
    const std::string out = tmp / "run";
    REQUIRE(run_cli("train --preset sbm --config " + cfg + " --set lr=0.01 --seed 2 --out " +
                    out) == 0);
    json manifest = json::parse(slurp(out + "/manifest.json"));
    CHECK(manifest["config"]["epochs"] == 3);
    CHECK(manifest["config"]["backbone"]["num_layers"] == 3);
    CHECK(manifest["config"]["tau"] == 0.7);
    CHECK(manifest["config"]["lr"] == 0.01);
}

TEST_CASE("eval modes write metrics files") {
    TempDir tmp;
    const std::string out = tmp / "run";
    REQUIRE(run_cli("train --preset sbm --seed 3 --set epochs=10 --out " + out) == 0);

    const std::string m1 = tmp / "probe.csv";
    REQUIRE(run_cli("eval --embeddings " + out + "/embeddings.csv --mode probe --out " + m1) == 0);
    CHECK(slurp(m1).rfind("metric,value\nprobe_accuracy,", 0) == 0);

    const std::string m2 = tmp / "kfold.csv";
    REQUIRE(run_cli("eval --embeddings " + out + "/embeddings.csv --mode kfold --k 5 --out " +
                    m2) == 0);
    CHECK(slurp(m2).rfind("metric,mean,sd\nkfold_accuracy,", 0) == 0);

    const std::string m3 = tmp / "cluster.csv";
    REQUIRE(run_cli("eval --embeddings " + out + "/embeddings.csv --mode cluster --out " + m3) ==
            0);
    CHECK(slurp(m3).rfind("metric,value\nacc,", 0) == 0);

    CHECK(run_cli("eval --embeddings " + out + "/embeddings.csv --mode telepathy --out " +
                  (tmp / "x.csv")) == 2);
}

TEST_CASE("eval rejects single-class labels with a usage error") {
    TempDir tmp;
    igcl::EmbeddingTable emb;
    emb.vectors = igcl::Tensor(10, 2);
    for (int i = 0; i < 10; ++i) {
        emb.vectors.at(i, 0) = i;
        emb.vectors.at(i, 1) = -i;
        emb.ids.push_back(i);
        emb.labels.push_back(0);
    }
    const std::string path = tmp / "mono.csv";
    igcl::export_embeddings(emb, path);
    CHECK(run_cli("eval --embeddings " + path + " --mode probe --out " + (tmp / "m.csv")) == 2);
}

TEST_CASE("quick verification passes and writes its report") {
    TempDir tmp;
    const std::string report = tmp / "verify_report.json";
    REQUIRE(run_cli("verify --quick --out " + report) == 0);
    json j = json::parse(slurp(report));
    CHECK(j["all_passed"] == true);
    CHECK(j["checks"].size() >= 13);
    CHECK(j.contains("sbm_pipeline_thresholds"));
}

TEST_CASE("ablate writes the four-row strategy table") {
    TempDir tmp;
    const std::string out = tmp / "ab";
    REQUIRE(run_cli("ablate --preset sbm --seed 5 --seeds 2 --set epochs=10 --out " + out) == 0);
    std::ifstream f(out + "/ablation.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header == "strategy,mean_accuracy,sd_accuracy,num_seeds");
    std::vector<std::string> names;
    for (std::string line; std::getline(f, line);)
        names.push_back(line.substr(0, line.find(',')));
    REQUIRE(names.size() == 4);
    CHECK(names[0] == "noise");
    CHECK(names[1] == "vgae_only");
    CHECK(names[2] == "explicit_cl");
    CHECK(names[3] == "icl");
}
