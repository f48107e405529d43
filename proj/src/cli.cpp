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

#include "ldlab/cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldlab/acceptance.hpp"
#include "ldlab/errors.hpp"
#include "ldlab/pipeline.hpp"
#include "ldlab/plots.hpp"

namespace ldlab::cli {

namespace {

namespace fs = std::filesystem;

IniDocument load_document(const std::string& path) {
    if (path.empty()) return {};
    if (fs::path(path).extension() == ".json") {
        std::ifstream in(path);
        if (!in) throw ConfigError(path, "cannot open manifest");
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.contains("config_snapshot")) {
            throw ConfigError(path, "not a manifest with a config_snapshot");
        }
        std::istringstream snap(j["config_snapshot"].get<std::string>());
        return IniDocument::parse(snap, path + ":config_snapshot");
    }
    return IniDocument::parse_file(path);
}

void report_checks(const RunContext& ctx, std::ostream& out) {
    for (const auto& c : ctx.checks()) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty()) out << ": " << c.detail;
        out << '\n';
    }
    for (const auto& w : ctx.warnings()) out << "warning: " << w << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"ldlab: decay of correlations and large deviations experiments", "ldlab"};
    std::string config_path;
    std::vector<std::string> sets;
    std::string profile;
    std::string out_dir = "out";
    std::optional<int> workers;
    std::string run_dir;

    app.add_option("--config", config_path, "INI configuration, or a manifest.json to replay");
    app.add_option("--set", sets, "Override: section.key=value (repeatable)");
    app.add_option("--profile", profile, "Run an acceptance profile (p1 .. p7)");
    app.add_option("--out", out_dir, "Root directory for run output")->capture_default_str();
    app.add_option("--workers", workers, "Worker threads (0: OpenMP default)")
        ->check(CLI::NonNegativeNumber);

    auto* decay = app.add_subcommand("decay", "Ulam decay curve and stretched-exponential fit");
    auto* ld = app.add_subcommand("ld", "Monte Carlo large-deviation grid");
    auto* verify = app.add_subcommand("verify", "Proof-chain verification");
    auto* plots = app.add_subcommand("plots", "CSV and SVG plots from a run directory");
    auto* all = app.add_subcommand("all", "decay, ld, verify and plots");
    plots->add_option("run_dir", run_dir, "Run directory holding manifest.json")->required();
    for (auto* s : {decay, ld, verify, plots, all}) s->fallthrough();
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (!profile.empty()) {
            if (!app.get_subcommands().empty()) {
                throw ConfigError("--profile", "cannot be combined with a subcommand");
            }
            const auto res = run_profile(profile, workers.value_or(0));
            for (const auto& c : res.criteria) out << format_line(c) << '\n';
            return res.passed() ? 0 : 1;
        }
        if (app.get_subcommands().empty()) {
            out << app.help();
            return 2;
        }
        if (plots->parsed()) {
            const auto res = emit_plots(fs::path(run_dir));
            for (const auto& f : res.files) out << "wrote " << f.string() << '\n';
            for (const auto& w : res.warnings) out << "warning: " << w << '\n';
            return 0;
        }

        auto doc = load_document(config_path);
        for (const auto& s : sets) doc.set(s);
        auto cfg = resolve(doc);
        if (workers) cfg.run.workers = *workers;

        RunContext ctx(cfg, out_dir);
        int code = 0;
        try {
            std::optional<DecayResult> d;
            std::optional<LdResult> l;
            const auto map = make_map(cfg.map);
            ctx.results()["map"] = {{"id", map.id()}};
            if (map.kind() == maps::MapKind::Viana) ctx.results()["map"]["a0"] = map.viana_params().a0;
            if (decay->parsed()) d = run_decay(ctx);
            if (ld->parsed()) l = run_ld(ctx);
            if (verify->parsed()) run_verify(ctx);
            if (all->parsed()) {
                if (map.is_one_dimensional()) {
                    d = run_decay(ctx);
                } else {
                    ctx.warn("decay stage skipped: " + map.id() + " is two-dimensional");
                }
                l = run_ld(ctx, d ? &*d : nullptr);
                run_verify(ctx, d ? &*d : nullptr, l ? &*l : nullptr);
            }
            code = ctx.all_passed() ? 0 : 1;
        } catch (const Error& e) {
            ctx.results()["error"] = e.what();
            err << "error: " << e.what() << '\n';
            code = 2;
        }
        const auto manifest = ctx.write_manifest();
        if (all->parsed() && code != 2) {
            for (const auto& w : emit_plots(ctx.run_dir()).warnings) ctx.warn(w);
        }
        report_checks(ctx, out);
        out << "manifest: " << manifest.string() << '\n';
        return code;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace ldlab::cli
