/*
   Copyright 2026 The ldlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "ldlab/cli.hpp"
#include "ldlab/config.hpp"
#include "ldlab/digest.hpp"
#include "ldlab/errors.hpp"
#include "ldlab/plots.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ldlab;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
    fs::path manifest;
};

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("ldlab_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "ldlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    Outcome o;
    o.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    o.out = out.str();
    o.err = err.str();
    const auto pos = o.out.find("manifest: ");
    if (pos != std::string::npos) {
        o.manifest = o.out.substr(pos + 10, o.out.find('\n', pos) - pos - 10);
    }
    return o;
}

json load(const fs::path& p) {
    std::ifstream is(p);
    return json::parse(is);
}

std::string config_dir() { return LDLAB_SOURCE_DIR "/configs/"; }

// Small grids so the whole pipeline runs in well under a second.
std::vector<std::string> small_doubling(const fs::path& out) {
    return {"--config", config_dir() + "doubling_cosine.ini",
            "--set", "ulam.bins=256",
            "--set", "ld.samples=2000",
            "--set", "ld.n=16,32,64,128",
            "--set", "ld.epsilon=0.1,2.0",
            "--set", "verify.calibration_samples=2000",
            "--set", "verify.calibration_n=100,1000",
            "--set", "verify.exp_samples=2000",
            "--set", "verify.heldout_n=300",
            "--out", out.string()};
}

cli::IniDocument parse(const std::string& text) {
    std::istringstream is(text);
    return cli::IniDocument::parse(is, "t.ini");
}

}  // namespace

TEST_CASE("config errors cite file and line") {
    CHECK_THROWS_WITH_AS(parse("[map]\nkind = doubling\nno equals sign\n"),
                         doctest::Contains("t.ini:3"), ConfigError);
    CHECK_THROWS_WITH_AS(cli::resolve(parse("[map]\nkind = doubling\n\n[nosuch]\nx = 1\n")),
                         doctest::Contains("t.ini:5 [nosuch]: unknown section"), ConfigError);
    CHECK_THROWS_WITH_AS(cli::resolve(parse("# comment\n[map]\nkind = doubling\ncolour = red\n")),
                         doctest::Contains("t.ini:4"), ConfigError);
    CHECK_THROWS_WITH_AS(cli::resolve(parse("[ld]\nsamples = many\n")), doctest::Contains("t.ini:2"),
                         ConfigError);
    auto doc = parse("[map]\nkind = intermittent\n");
    doc.set("map.gamma=1.5");
    CHECK_THROWS_WITH_AS(cli::resolve(doc), doctest::Contains("θ ∈ (0,1]"), ConfigError);
    CHECK_THROWS_AS(doc.set("gamma=0.5"), ConfigError);
}

TEST_CASE("config resolution and canonical text") {
    auto doc = parse("[run]\nseed = 7\n[ld]\nn = 16, 32\nepsilon = 0.1\n[observable]\ncenter = none\n");
    const auto cfg = cli::resolve(doc);
    CHECK(cfg.run.seed == 7);
    CHECK(cfg.ld.n == std::vector<std::size_t>{16, 32});
    CHECK(cfg.ld.epsilon == std::vector<double>{0.1});
    CHECK(cfg.observable.center == "none");
    CHECK(cli::resolve(parse(cfg.to_text())).to_text() == cfg.to_text());
    CHECK(parse("[b]\ny=2\n[a]\nx=1\n").to_text() == parse("[a]\nx = 1\n[b]\ny = 2\n").to_text());
}

TEST_CASE("decay rejects gamma outside (0,1] with exit code 2") {
    const auto dir = scratch("gamma");
    const auto o = run({"decay", "--config", config_dir() + "intermittent.ini", "--set", "map.gamma=1.5",
                        "--out", dir.string()});
    CHECK(o.code == 2);
    CHECK(o.err.find("θ ∈ (0,1]") != std::string::npos);
}

TEST_CASE("doubling cosine decay is flagged as a noise floor") {
    const auto dir = scratch("noise");
    const auto o = run({"decay", "--config", config_dir() + "doubling_cosine.ini", "--set",
                        "ulam.bins=256", "--out", dir.string()});
    REQUIRE(o.code == 0);
    const auto m = load(o.manifest);
    CHECK(m["results"]["decay"]["noise_floor"] == true);
    CHECK(m["results"]["decay"]["theta_hat"].is_null());
    CHECK(m["all_passed"] == true);
}

TEST_CASE("intermittent decay carries a refinement report") {
    const auto dir = scratch("refine");
    const auto o = run({"decay", "--config", config_dir() + "intermittent.ini", "--set",
                        "ulam.bins=256", "--out", dir.string()});
    REQUIRE(o.code == 0);
    const auto m = load(o.manifest);
    const auto& r = m["results"]["decay"]["refinement"];
    CHECK(r["bins_fine"] == 512);
    CHECK(r["stable"] == true);
    CHECK(m["results"]["decay"]["theta_hat"].get<double>() > 0.0);
    CHECK(o.out.find("PASS decay.refinement_stability") != std::string::npos);
}

TEST_CASE("verify without a decay hypothesis names the missing stage") {
    const auto dir = scratch("dep");
    const auto o = run({"verify", "--config", config_dir() + "intermittent.ini", "--out", dir.string()});
    CHECK(o.code == 2);
    CHECK(o.err.find("decay") != std::string::npos);
}

TEST_CASE("synthetic constants with tau' doubled fail the series step") {
    const auto dir = scratch("divergent");
    auto args = small_doubling(dir);
    args.insert(args.begin(), "verify");
    for (const char* s : {"verify.theta=1", "verify.tau=1", "verify.tau_prime_scale=2"}) {
        args.push_back("--set");
        args.push_back(s);
    }
    const auto o = run(args);
    CHECK(o.code == 1);
    CHECK(o.out.find("FAIL verify.exp_moment: divergent series") != std::string::npos);
    const auto m = load(o.manifest);
    CHECK(m["all_passed"] == false);
}

TEST_CASE("full pipeline, manifest replay and plots") {
    const auto dir = scratch("all");
    auto args = small_doubling(dir / "a");
    args.insert(args.begin(), "all");
    const auto first = run(args);
    REQUIRE(first.code == 0);
    const auto m1 = load(first.manifest);
    const fs::path run1 = first.manifest.parent_path();
    CHECK(m1["all_passed"] == true);
    CHECK(m1["config_hash"].get<std::string>().size() == 64);
    CHECK(run1.filename().string().ends_with(m1["config_hash"].get<std::string>().substr(0, 8)));

    for (const auto& a : m1["artifacts"]) {
        const auto p = run1 / a["path"].get<std::string>();
        REQUIRE(fs::exists(p));
        CHECK(cli::sha256_file(p) == a["sha256"].get<std::string>());
        CHECK(fs::file_size(p) == a["bytes"].get<std::uintmax_t>());
    }

    // The degenerate column: epsilon above sup |phi_bar|.
    bool degenerate = false;
    for (const auto& col : m1["results"]["ld"]["columns"]) {
        if (col["epsilon"] == 2.0) {
            degenerate = col["degenerate"].get<bool>();
            for (const auto& c : col["cells"]) CHECK(c["p_hat"] == 0.0);
        }
    }
    CHECK(degenerate);

    // Replay from the manifest: every number and artifact is bit-identical.
    const auto second = run({"all", "--config", first.manifest.string(), "--out", (dir / "b").string()});
    REQUIRE(second.code == 0);
    const auto m2 = load(second.manifest);
    CHECK(m2["config_hash"] == m1["config_hash"]);
    CHECK(m2["config_snapshot"] == m1["config_snapshot"]);
    CHECK(m2["results"] == m1["results"]);
    CHECK(m2["artifacts"] == m1["artifacts"]);
    CHECK(m2["plots"] == m1["plots"]);

    // Overlay: the bound sits above every verified point.
    std::size_t overlays = 0;
    for (const auto& entry : fs::directory_iterator(run1 / "plots")) {
        const auto name = entry.path().filename().string();
        if (!name.starts_with("ld_eps_") || entry.path().extension() != ".csv") continue;
        ++overlays;
        std::ifstream is(entry.path());
        std::string line;
        std::getline(is, line);
        CHECK(line == "n,p_hat,ci_low,ci_high,theorem_bound");
        while (std::getline(is, line)) {
            double v[5];
            std::istringstream ls(line);
            char comma;
            ls >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3] >> comma >> v[4];
            CHECK(v[4] >= v[3]);
        }
    }
    CHECK(overlays == 2);
}

TEST_CASE("plots from manifests") {
    const auto dir = scratch("plots");
    json m;
    m["results"]["decay"]["curve"] = {{"n", {1, 2, 3, 4}}, {"a", {0.5, 0.25, 0.125, 0.0625}}};
    m["results"]["decay"]["theta_hat"] = 1.0;
    m["results"]["decay"]["fit"] = {{"C", 1.0}, {"tau", std::log(2.0)}, {"theta", 1.0}};
    const auto one = cli::emit_plots(m, dir / "one");
    REQUIRE(one.files.size() == 2);
    CHECK(one.files[0].extension() == ".csv");
    CHECK(one.files[1].extension() == ".svg");
    CHECK(one.warnings.empty());

    const auto none = cli::emit_plots(json::object(), dir / "none");
    CHECK(none.files.empty());
    CHECK(none.warnings.size() == 1);
    CHECK((!fs::exists(dir / "none") || fs::is_empty(dir / "none")));
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"--profile", "p9"}).code == 2);
    CHECK(run({"decay", "--config", "/nonexistent.ini"}).code == 2);
}

TEST_CASE("profile p1 runs through the CLI") {
    const auto o = run({"--profile", "p1"});
    CHECK(o.code == 0);
    CHECK(o.out.rfind("PASS P1", 0) == 0);
}
