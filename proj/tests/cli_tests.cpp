#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string output;
};

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "tsdiff_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path log = work_dir() / ("out" + std::to_string(counter++) + ".log");
    const std::string cmd = std::string(TSDIFF_BIN) + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    CliResult result;
    result.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    result.output = ss.str();
    return result;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const std::string& name, const json& j) {
    const fs::path path = work_dir() / name;
    std::ofstream out(path);
    out << j.dump(2);
    return path;
}

json tiny_config() {
    return json::parse(R"({
        "seed": 5,
        "dataset": {"type": "sine", "num_sequences": 200, "seq_len": 8, "dims": 2,
                    "heldout_fraction": 0.2},
        "schedule": {"num_steps": 8},
        "denoiser": {"hidden_dim": 8, "num_layers": 1, "num_heads": 1},
        "train": {"epochs": 2, "batch_size": 32, "learning_rate": 0.001,
                  "checkpoint_interval": 1},
        "metrics": {"repetitions": 2, "hidden_dim": 8, "num_layers": 1, "num_heads": 1,
                    "epochs": 2, "batch_size": 8, "coverage_k": 5},
        "sample": {"count": 3, "chunk": 2}
    })");
}

int count_lines(const std::string& text) {
    int lines = 0;
    for (char c : text) {
        if (c == '\n') ++lines;
    }
    return lines;
}

}  // namespace

TEST_CASE("train writes a complete, reproducible run directory") {
    const fs::path cfg = write_config("train.json", tiny_config());
    const fs::path run_a = work_dir() / "run_a";
    const CliResult a = run_cli("train --config " + cfg.string() + " --out " + run_a.string());
    CAPTURE(a.output);
    REQUIRE(a.code == 0);

    CHECK(fs::exists(run_a / "config.json"));
    CHECK(fs::exists(run_a / "loss.csv"));
    CHECK(fs::exists(run_a / "checkpoint.bin"));
    CHECK(fs::exists(run_a / "checkpoint_epoch000001.bin"));
    CHECK(fs::exists(run_a / "checkpoint_epoch000002.bin"));
    CHECK(fs::exists(run_a / "heldout.csv"));
    CHECK(fs::exists(run_a / "heldout.meta.json"));
    CHECK(count_lines(read_file(run_a / "loss.csv")) == 1 + 2);  // header + one line per epoch

    // identical seed reproduces the loss log byte for byte
    const fs::path run_b = work_dir() / "run_b";
    const CliResult b = run_cli("train --config " + cfg.string() + " --out " + run_b.string());
    REQUIRE(b.code == 0);
    CHECK(read_file(run_a / "loss.csv") == read_file(run_b / "loss.csv"));
    CHECK(read_file(run_a / "heldout.csv") == read_file(run_b / "heldout.csv"));

    // a different seed changes it
    const fs::path run_c = work_dir() / "run_c";
    const CliResult c =
        run_cli("train --config " + cfg.string() + " --out " + run_c.string() + " --seed 6");
    REQUIRE(c.code == 0);
    CHECK(read_file(run_a / "loss.csv") != read_file(run_c / "loss.csv"));
}

TEST_CASE("sample emits count*N rows deterministically and validates seq-len") {
    const fs::path ckpt = work_dir() / "run_a" / "checkpoint.bin";
    REQUIRE(fs::exists(ckpt));

    const fs::path s1 = work_dir() / "samples1";
    const fs::path s2 = work_dir() / "samples2";
    const CliResult a = run_cli("sample --checkpoint " + ckpt.string() + " --count 3 --seed 7 --out " +
                                s1.string());
    CAPTURE(a.output);
    REQUIRE(a.code == 0);
    const CliResult b = run_cli("sample --checkpoint " + ckpt.string() + " --count 3 --seed 7 --out " +
                                s2.string());
    REQUIRE(b.code == 0);

    const std::string csv1 = read_file(s1 / "samples.csv");
    CHECK(count_lines(csv1) == 1 + 3 * 8);
    CHECK(csv1 == read_file(s2 / "samples.csv"));
    CHECK(fs::exists(s1 / "samples.meta.json"));

    const CliResult bad =
        run_cli("sample --checkpoint " + ckpt.string() + " --count 1 --seq-len 9 --out " +
                (work_dir() / "samples3").string());
    CHECK(bad.code == 2);
    CHECK(bad.output.find("seq-len") != std::string::npos);
}

TEST_CASE("evaluate: self-comparison sanity, determinism, and error taxonomy") {
    const fs::path heldout = work_dir() / "run_a" / "heldout.csv";
    REQUIRE(fs::exists(heldout));
    const fs::path cfg = write_config("eval.json", tiny_config());

    const fs::path e1 = work_dir() / "eval1";
    const CliResult a = run_cli("evaluate --real " + heldout.string() + " --synthetic " +
                                heldout.string() + " --config " + cfg.string() + " --out " +
                                e1.string());
    CAPTURE(a.output);
    REQUIRE(a.code == 0);

    const json reports = json::parse(read_file(e1 / "metrics.json"));
    REQUIRE(reports.is_array());
    double jsd_mean = -1.0, coverage_mean = -1.0, lds_mean = -1.0;
    for (const auto& r : reports) {
        if (r.at("metric") == "jsd") jsd_mean = r.at("mean").get<double>();
        if (r.at("metric") == "coverage") coverage_mean = r.at("mean").get<double>();
        if (r.at("metric") == "lds") lds_mean = r.at("mean").get<double>();
        CHECK(r.contains("config_digest"));
        CHECK(r.contains("seed"));
    }
    CHECK(jsd_mean < 1e-12);
    CHECK(coverage_mean == 1.0);
    CHECK(lds_mean <= 0.25);  // identical data defeats the classifier

    const fs::path e2 = work_dir() / "eval2";
    const CliResult b = run_cli("evaluate --real " + heldout.string() + " --synthetic " +
                                heldout.string() + " --config " + cfg.string() + " --out " +
                                e2.string());
    REQUIRE(b.code == 0);
    CHECK(read_file(e1 / "metrics.json") == read_file(e2 / "metrics.json"));

    const CliResult missing = run_cli("evaluate --real " + heldout.string() +
                                      " --synthetic /nonexistent.csv --out " +
                                      (work_dir() / "eval3").string());
    CHECK(missing.code == 3);
}

TEST_CASE("project: pca embedding export") {
    const fs::path heldout = work_dir() / "run_a" / "heldout.csv";
    const fs::path p1 = work_dir() / "proj1";
    const CliResult a = run_cli("project --real " + heldout.string() + " --synthetic " +
                                heldout.string() + " --method pca --out " + p1.string());
    CAPTURE(a.output);
    REQUIRE(a.code == 0);
    const std::string csv = read_file(p1 / "embedding.csv");
    CHECK(count_lines(csv) == 1 + 40 * 2);  // 40 held-out sequences per side
    CHECK(csv.rfind("x,y,label", 0) == 0);
    const json meta = json::parse(read_file(p1 / "embedding.meta.json"));
    CHECK(meta.at("method") == "pca");
    CHECK(meta.contains("explained_variance"));

    const CliResult bad = run_cli("project --real " + heldout.string() + " --synthetic " +
                                  heldout.string() + " --method umap --out " +
                                  (work_dir() / "proj2").string());
    CHECK(bad.code == 2);
}

TEST_CASE("config errors exit with code 2 and name the field") {
    json no_dataset = tiny_config();
    no_dataset.erase("dataset");
    const fs::path cfg1 = write_config("no_dataset.json", no_dataset);
    const CliResult a =
        run_cli("train --config " + cfg1.string() + " --out " + (work_dir() / "x1").string());
    CHECK(a.code == 2);
    CHECK(a.output.find("dataset") != std::string::npos);

    json csv_no_path = tiny_config();
    csv_no_path["dataset"] = {{"type", "csv"}, {"columns", {"a"}}};
    const fs::path cfg2 = write_config("csv_no_path.json", csv_no_path);
    const CliResult b =
        run_cli("train --config " + cfg2.string() + " --out " + (work_dir() / "x2").string());
    CHECK(b.code == 2);
    CHECK(b.output.find("dataset.path") != std::string::npos);

    json unknown = tiny_config();
    unknown["extra_knob"] = 1;
    const fs::path cfg3 = write_config("unknown.json", unknown);
    const CliResult c =
        run_cli("train --config " + cfg3.string() + " --out " + (work_dir() / "x3").string());
    CHECK(c.code == 2);
    CHECK(c.output.find("extra_knob") != std::string::npos);

    const fs::path cfg4 = work_dir() / "broken.json";
    {
        std::ofstream out(cfg4);
        out << "{not json";
    }
    const CliResult d =
        run_cli("train --config " + cfg4.string() + " --out " + (work_dir() / "x4").string());
    CHECK(d.code == 2);

    // data errors map to exit 3: a csv dataset pointing at a missing file
    json missing_file = tiny_config();
    missing_file["dataset"] = {{"type", "csv"},
                               {"path", "/nonexistent/data.csv"},
                               {"columns", {"a"}}};
    const fs::path cfg5 = write_config("missing_file.json", missing_file);
    const CliResult e =
        run_cli("train --config " + cfg5.string() + " --out " + (work_dir() / "x5").string());
    CHECK(e.code == 3);
}
