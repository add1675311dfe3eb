#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

#ifndef XYEP_CLI_PATH
#define XYEP_CLI_PATH "xyep"
#endif

struct RunResult {
    int exit_code;
    std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args, const std::string& log_name) {
    const auto log = (fs::temp_directory_path() / log_name).string();
    const std::string cmd =
        std::string(XYEP_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::ostringstream out;
    out << in.rdbuf();
    return {WEXITSTATUS(status), out.str()};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path fresh_dir(const char* name) {
    auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// Small teacher-toy run on a 3-node all-to-all net; finishes in well under a
/// second.
std::string teacher_config(const fs::path& out_dir, int epochs = 20,
                           double learning_rate = 0.05) {
    std::ostringstream cfg;
    cfg << R"({
  "schema_version": 1,
  "task": "teacher-toy",
  "architecture": {"family": "all_to_all", "n": 3},
  "placement": {"inputs": [0], "outputs": [2]},
  "ep": {"learning_rate": )"
        << learning_rate << R"(, "epochs": )" << epochs << R"(,
         "batch_size": 4, "eval_interval": 10},
  "relax": {"m_init": 2},
  "seeds": {"network_init": 1, "training": 2, "split": 3},
  "data": {"teacher_samples": 8},
  "probe": {"flip_input_index": 0, "flipped_phase": 1.2},
  "probe_epochs": [0],
  "output_dir": ")"
        << out_dir.string() << R"("
})";
    return cfg.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    auto path = dir / "config.json";
    std::ofstream(path, std::ios::binary) << text;
    return path;
}

}  // namespace

TEST_CASE("train writes records, checkpoints and a manifest") {
    auto dir = fresh_dir("xyep_cli_train");
    auto cfg = write_config(dir, teacher_config(dir / "out"));

    auto res = run_cli("train " + cfg.string(), "xyep_cli_train.log");
    CHECK(res.exit_code == 0);

    const auto records = slurp(dir / "out" / "records.csv");
    CHECK(records.rfind("epoch,split,mean_distance,accuracy,converged_fraction,wall_ms\n",
                        0) == 0);
    CHECK(records.find("\n10,train,") != std::string::npos);
    CHECK(records.find("\n20,test,") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "checkpoint.json"));
    CHECK(fs::exists(dir / "out" / "ckpt_epoch0.json"));

    const auto manifest = slurp(dir / "out" / "manifest.json");
    CHECK(manifest.find("\"config_hash\"") != std::string::npos);
    CHECK(manifest.find("\"schema_version\": 1") != std::string::npos);

    SUBCASE("re-running reproduces records byte for byte") {
        auto dir2 = fresh_dir("xyep_cli_train2");
        auto cfg2 = write_config(dir2, teacher_config(dir2 / "out"));
        auto res2 = run_cli("train " + cfg2.string(), "xyep_cli_train2.log");
        CHECK(res2.exit_code == 0);
        // Strip the wall_ms column before comparing.
        auto strip = [](const std::string& text) {
            std::istringstream in(text);
            std::ostringstream out;
            std::string line;
            while (std::getline(in, line))
                out << line.substr(0, line.rfind(',')) << '\n';
            return out.str();
        };
        CHECK(strip(records) == strip(slurp(dir2 / "out" / "records.csv")));
        CHECK(slurp(dir / "out" / "checkpoint.json") ==
              slurp(dir2 / "out" / "checkpoint.json"));
    }

    SUBCASE("eval prints metrics and is repeatable") {
        const auto ckpt = (dir / "out" / "checkpoint.json").string();
        auto e1 = run_cli("eval " + ckpt + " " + cfg.string(), "xyep_cli_eval1.log");
        auto e2 = run_cli("eval " + ckpt + " " + cfg.string(), "xyep_cli_eval2.log");
        CHECK(e1.exit_code == 0);
        CHECK(e1.output.rfind("split=test mean_distance=", 0) == 0);
        CHECK(e1.output.find("accuracy=") != std::string::npos);
        CHECK(e1.output == e2.output);
        CHECK(fs::exists(dir / "out" / "metrics.csv"));
    }

    SUBCASE("probe writes response and coupling CSVs per checkpoint") {
        auto res2 = run_cli("probe " + (dir / "out" / "checkpoint.json").string() +
                                " " + cfg.string() + " --also " +
                                (dir / "out" / "ckpt_epoch0.json").string(),
                            "xyep_cli_probe.log");
        CHECK(res2.exit_code == 0);
        for (const char* name : {"response_epoch20.csv", "couplings_epoch20.csv",
                                 "response_epoch0.csv", "couplings_epoch0.csv"})
            CHECK(fs::exists(dir / "out" / name));
        const auto resp = slurp(dir / "out" / "response_epoch20.csv");
        CHECK(resp.rfind("node,layer,channel,x,y,response\n", 0) == 0);
        CHECK(std::count(resp.begin(), resp.end(), '\n') == 4);  // header + 3 nodes
    }

    SUBCASE("corrupt checkpoint exits with the config error code") {
        auto bad = dir / "bad_ckpt.json";
        std::ofstream(bad) << "{\"schema_version\": 99}";
        auto res2 = run_cli("eval " + bad.string() + " " + cfg.string(),
                            "xyep_cli_badckpt.log");
        CHECK(res2.exit_code == 1);
        CHECK(res2.output.find("checkpoint") != std::string::npos);
    }
}

TEST_CASE("missing dataset exits with code 2 and names the path") {
    auto dir = fresh_dir("xyep_cli_nodata");
    std::string text = teacher_config(dir / "out");
    text.replace(text.find("teacher-toy"), 11, "iris");
    auto pos = text.find("\"teacher_samples\": 8");
    text.replace(pos, 20, "\"iris_csv\": \"/nonexistent/iris.csv\"");
    auto cfg = write_config(dir, text);

    auto res = run_cli("train " + cfg.string(), "xyep_cli_nodata.log");
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("/nonexistent/iris.csv") != std::string::npos);
}

TEST_CASE("malformed config exits with code 1") {
    auto dir = fresh_dir("xyep_cli_badcfg");
    auto cfg = write_config(dir, "{not json");
    auto res = run_cli("train " + cfg.string(), "xyep_cli_badcfg.log");
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("config") != std::string::npos);

    auto cfg2 = dir / "missing.json";
    auto res2 = run_cli("train " + cfg2.string(), "xyep_cli_missingcfg.log");
    CHECK(res2.exit_code == 1);
}

TEST_CASE("config hash tracks config content") {
    auto dir_a = fresh_dir("xyep_cli_hash_a");
    auto dir_b = fresh_dir("xyep_cli_hash_b");
    auto cfg_a = write_config(dir_a, teacher_config(dir_a / "out", 5));
    auto cfg_b = write_config(dir_b, teacher_config(dir_b / "out", 6));
    CHECK(run_cli("train " + cfg_a.string(), "xyep_cli_hash_a.log").exit_code == 0);
    CHECK(run_cli("train " + cfg_b.string(), "xyep_cli_hash_b.log").exit_code == 0);

    auto hash_of = [](const fs::path& manifest) {
        const auto text = slurp(manifest);
        const auto key = text.find("\"config_hash\": \"");
        REQUIRE(key != std::string::npos);
        return text.substr(key + 16, 16);
    };
    CHECK(hash_of(dir_a / "out" / "manifest.json") !=
          hash_of(dir_b / "out" / "manifest.json"));
}
