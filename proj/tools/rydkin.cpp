// rydkin command-line runner: one subcommand per scenario kind, declarative
// JSON configs, CSV tables plus a manifest per run.
//
// Exit codes: 0 success, 2 config error, 3 capacity error, 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rydkin/presets.hpp"
#include "rydkin/scenario.hpp"
#include "rydkin/version.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw rydkin::config_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::uint64_t trajectories = 0;
    unsigned threads = 0;
    bool threads_set = false;
    bool dump_preset = false;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("rydkin ") + rydkin::code_version +
                 " - kinetic Monte Carlo, mean-field and quantum-jump toolkit for "
                 "dissipative Rydberg gases"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string chosen_kind;
    for (const auto& [name, kind] : rydkin::scenario_kind_names()) {
        (void)kind;
        auto* sub = app.add_subcommand(name, rydkin::preset_description(name));
        sub->add_option("--config", opts.config_path, "scenario config file (JSON)");
        sub->add_option("--out-dir", opts.out_dir, "output directory (default out/<kind>)");
        auto* seed_opt = sub->add_option("--seed", opts.seed, "RNG seed override");
        sub->add_option("--trajectories", opts.trajectories, "trajectory/shot count override");
        auto* thr_opt = sub->add_option("--threads", opts.threads, "worker threads (0 = auto)");
        sub->add_flag("--dump-preset", opts.dump_preset,
                      "print the built-in preset config and exit");
        std::string kind_name = name;
        sub->callback([&, kind_name, seed_opt, thr_opt] {
            chosen_kind = kind_name;
            opts.seed_set = seed_opt->count() > 0;
            opts.threads_set = thr_opt->count() > 0;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        std::string text = opts.config_path.empty() ? rydkin::preset_config(chosen_kind)
                                                    : read_file(opts.config_path);
        if (opts.dump_preset) {
            std::fputs(rydkin::preset_config(chosen_kind).c_str(), stdout);
            return 0;
        }
        rydkin::Scenario s = rydkin::parse_scenario_text(text);
        if (s.kind_name != chosen_kind)
            throw rydkin::config_error("scenario.kind '" + s.kind_name +
                                       "' does not match subcommand '" + chosen_kind + "'");
        if (opts.seed_set) {
            s.run.seed = opts.seed;
            s.resolved["scenario"]["seed"] = opts.seed;
        }
        if (opts.trajectories > 0) {
            s.run.trajectories = opts.trajectories;
            s.resolved["scenario"]["trajectories"] = opts.trajectories;
        }
        if (opts.threads_set) {
            s.run.threads = opts.threads;
            s.resolved["scenario"]["threads"] = opts.threads;
        }

        auto bundle = rydkin::run_scenario(s);
        std::filesystem::path out_dir =
            opts.out_dir.empty() ? std::filesystem::path("out") / chosen_kind
                                 : std::filesystem::path(opts.out_dir);
        auto written = rydkin::serialize_results(bundle, out_dir);
        std::printf("%s: wrote %zu table(s) + manifest to %s\n", chosen_kind.c_str(),
                    written.size(), out_dir.string().c_str());
        for (const auto& w : written) std::printf("  %s (%zu rows)\n", w.name.c_str(), w.rows);
        return 0;
    } catch (const rydkin::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const rydkin::capacity_error& e) {
        std::fprintf(stderr, "capacity error: %s\n", e.what());
        return 3;
    } catch (const rydkin::numeric_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
