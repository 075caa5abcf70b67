#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "qpjacobi/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Finite-scale spectral experiments for quasiperiodic Jacobi matrices"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string preset;
    int threads = -1;

    const std::vector<std::string> names = {"spectrum",  "lyapunov", "gaps",
                                            "resonances", "badset",   "localize",
                                            "green-check", "ldt",      "avalanche-check",
                                            "identities"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--threads", threads, "worker threads (0 = hardware)");
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--preset", preset, "preset override: paper|custom");
    }

    CLI11_PARSE(app, argc, argv);
    std::string sub = app.get_subcommands().front()->get_name();

    qpj::ExperimentConfig cfg;
    try {
        cfg = qpj::load_config(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "{\"error\":\"config\",\"detail\":\"%s\"}\n", e.what());
        return 1;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!preset.empty()) {
        if (preset != "paper" && preset != "custom") {
            std::fprintf(stderr, "{\"error\":\"config\",\"detail\":\"bad preset %s\"}\n", preset.c_str());
            return 1;
        }
        cfg.preset = preset;
    }
    if (threads >= 0) {
        cfg.threads = threads;
    } else if (const char* env = std::getenv("QPJACOBI_THREADS")) {
        cfg.threads = std::atoi(env);
    }
    return qpj::run_subcommand(sub, cfg);
}
