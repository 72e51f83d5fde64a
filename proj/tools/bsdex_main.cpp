#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bsde/experiment.hpp"
#include "bsde/fixtures.hpp"

namespace {

// Output directory precedence: --out flag, then the config's out_dir, then
// the BSDEX_OUT_DIR environment variable, then the working directory.
std::string resolve_out(const std::string& flag, const std::string& from_config) {
    if (!flag.empty()) return flag;
    if (!from_config.empty()) return from_config;
    if (const char* env = std::getenv("BSDEX_OUT_DIR")) return env;
    return ".";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"backward-equation experiment runner"};
    app.require_subcommand(1);

    std::string config_path, out_flag, fixture_name;
    long long seed_flag = -1;
    int paths_flag = 0, steps_flag = 0;
    long long aseed = 2026;

    CLI::App* run = app.add_subcommand("run", "solve a configured problem and run its checks");
    run->add_option("config", config_path, "JSON config file")->required();
    run->add_option("--seed", seed_flag, "override the config seed");
    run->add_option("--paths", paths_flag, "override the ensemble size");
    run->add_option("--steps", steps_flag, "override the grid resolution");
    run->add_option("--out", out_flag, "output directory");

    CLI::App* assume = app.add_subcommand("assumptions", "certify a fixture's structural claims");
    assume->add_option("fixture", fixture_name, "fixture name")->required();
    assume->add_option("--seed", aseed, "sampler seed");
    assume->add_option("--out", out_flag, "output directory");

    CLI::App* list = app.add_subcommand("list-fixtures", "print the known fixture names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (list->parsed()) {
            for (const std::string& name : bsde::fixture_names()) std::cout << name << "\n";
            return 0;
        }

        if (assume->parsed()) {
            if (aseed < 0) throw bsde::ConfigError("--seed must be nonnegative");
            std::string dir = resolve_out(out_flag, "");
            int rc = bsde::write_assumption_report(fixture_name, dir, std::cout,
                                                   static_cast<std::uint64_t>(aseed));
            std::cout << "wrote " << dir << "/assumptions.json\n";
            return rc;
        }

        std::ifstream in(config_path);
        if (!in) throw bsde::ConfigError("cannot read config file '" + config_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        bsde::ExperimentConfig cfg = bsde::parse_config(buf.str());

        if (run->count("--seed")) {
            if (seed_flag < 0) throw bsde::ConfigError("--seed must be nonnegative");
            cfg.seed = static_cast<std::uint64_t>(seed_flag);
        }
        if (run->count("--paths")) cfg.paths = paths_flag;
        if (run->count("--steps")) cfg.steps = steps_flag;
        // Flag overrides go through the same validation as file input.
        std::string out_dir = resolve_out(out_flag, cfg.out_dir);
        int workers = cfg.workers;
        cfg = bsde::parse_config(bsde::normalized_json(cfg));
        cfg.out_dir = out_dir;
        cfg.workers = workers;

        bsde::RunArtifacts art = bsde::run_experiment(cfg);
        std::cout << "fixture " << cfg.fixture << "  seed " << cfg.seed << "  paths "
                  << cfg.paths << "  steps " << cfg.steps << "\n";
        std::cout << "config hash " << bsde::config_hash_hex(cfg) << "\n";
        std::cout << "y0 mean " << art.y0_mean << "\n";
        for (const auto& [name, ok] : art.checks)
            std::cout << "check " << name << ": " << (ok ? "pass" : "FAIL") << "\n";
        for (const std::string& f : art.files) std::cout << "wrote " << f << "\n";
        return art.exit_code;
    } catch (const bsde::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
