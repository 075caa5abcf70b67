#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qpjacobi/interval_union.hpp"
#include "qpjacobi/trig.hpp"

namespace qpj {

struct OmegaSpec {
    enum class Kind { literal, golden, silver, quotients } kind = Kind::golden;
    double literal = 0.0;
    std::vector<std::int64_t> quotients;
    double value() const;
};

struct PresetParams {
    double p = 16.0;
    double A = 2.0;  // desk-scale stand-in, not a sourced value
    double tau = 1e-3;
    double sigma = 1e-4;
    long Q = 40;
    long M = 400;
    long l = 16;
};

struct ExperimentConfig {
    std::string model_path;
    OmegaSpec omega;
    std::vector<long> scales;       // N list
    int x_grid = 512;
    std::optional<std::pair<double, double>> energy_window;
    std::string preset = "custom";  // "paper" expands sigma/Q/l from N and A
    PresetParams params;
    std::string out_dir = "out";
    int threads = 0;  // 0 = hardware
    std::uint64_t seed = 1;
    std::string bad_set_path;       // optional prior bad set
    std::vector<double> ldt_h_values{1.0, 2.0, 4.0, 8.0};
    double ldt_c0_proxy = 1.0;
    double x = 0.0;  // base phase for single-phase tasks
    double y = 0.0;
    int energy_samples = 20;        // spectrum samples of E for lyapunov/green/ldt tasks
    std::string config_dir;         // directory of the config file, for relative paths
    std::string raw_json;           // canonical payload for hashing
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text, const std::string& config_dir = {});

/// Effective sigma/Q/M/l/tau for scale N under the config's preset.
PresetParams effective_params(const ExperimentConfig& cfg, long n);

/// FNV-1a 64 content hash, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

struct TaskRecord {
    std::string name;
    std::vector<std::string> files;  // paths relative to the output directory
    std::vector<std::string> hashes;
    bool failed = false;
    std::string diagnostic;
};

struct RunManifest {
    std::string config_hash;
    std::string tool_version;
    std::string grid_provenance;  // q_s used for phase grids
    std::vector<TaskRecord> tasks;
    double wall_clock_seconds = 0.0;  // manifest only; never in payload files
    std::string to_json() const;
};

/// Exit codes: 0 success, 1 config error, 2 partial task failure.
int run_subcommand(const std::string& subcommand, const ExperimentConfig& config,
                   RunManifest* manifest_out = nullptr);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

const char* tool_version();

}  // namespace qpj
