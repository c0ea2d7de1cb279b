#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qboltz/errors.hpp"
#include "qboltz/runner.hpp"

namespace {

constexpr int exit_validation = 2;
constexpr int exit_contract = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Runs one experiment from a JSON config and writes CSV/JSON artifacts plus manifest.json."};
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<int> dense_cap;
    bool validate_only = false;
    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out, "output directory, overrides output_dir");
    app.add_option("--seed", seed, "64-bit seed, overrides seed");
    app.add_option("--workers", workers, "worker threads for parameter sweeps");
    app.add_option("--dense-cap", dense_cap, "largest L for the dense reference engine");
    app.add_flag("--validate", validate_only, "print diagnostics and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    qboltz::runner::RunConfig config;
    try {
        std::ifstream f(config_path);
        if (!f) {
            std::cerr << "error: cannot open " << config_path << "\n";
            return exit_validation;
        }
        config = qboltz::runner::parse_config(nlohmann::json::parse(f));
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return exit_validation;
    } catch (const qboltz::ConfigInvalid& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return exit_validation;
    }
    if (out) {
        config.output_dir = *out;
    }
    if (seed) {
        config.seed = *seed;
    }
    if (workers) {
        config.workers = *workers;
    }
    if (dense_cap) {
        config.dense_cap = *dense_cap;
    }

    const auto diags = qboltz::runner::validate(config);
    for (const auto& d : diags) {
        std::cerr << "invalid: " << d << "\n";
    }
    if (!diags.empty()) {
        return exit_validation;
    }
    if (validate_only) {
        std::cout << "config ok\n";
        return 0;
    }

    try {
        const auto manifest = qboltz::runner::run(config);
        std::cout << config.experiment << ": wrote " << manifest.files.size() + 1 << " files to " << config.output_dir.string()
                  << " in " << manifest.wall_time << " s\n";
        for (const auto& v : manifest.violations) {
            std::cerr << "contract violation: " << v << "\n";
        }
        return qboltz::runner::exit_code(manifest);
    } catch (const qboltz::DimensionCap& e) {
        std::cerr << "cap exceeded: " << e.what() << "\n";
        return exit_validation;
    } catch (const qboltz::OrbitCap& e) {
        std::cerr << "cap exceeded: " << e.what() << "\n";
        return exit_validation;
    } catch (const qboltz::ConfigInvalid& e) {
        std::cerr << e.what() << "\n";
        return exit_validation;
    } catch (const qboltz::Error& e) {
        std::cerr << "numerical contract: " << e.what() << "\n";
        return exit_contract;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
