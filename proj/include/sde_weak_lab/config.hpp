#pragma once

#include <map>
#include <string>
#include <vector>

namespace sdelab {

using KeyValues = std::map<std::string, std::string>;

/// Flat key=value files with '#' comments; keys use section dots
/// (run.seed, map.family). Unknown keys are rejected except the meta.*
/// namespace, so a run manifest can be re-fed as a config.
KeyValues parse_config_file(const std::string& path);
KeyValues parse_config_text(const std::string& text);

/// Effective settings of one batch run. Every field has a default except
/// the command; command-line flags override config-file keys.
struct RunConfig {
    std::string command;

    // problem.*
    std::string problem = "cubic_linear";
    double sigma = 0.1;
    double p_large = 1e6;
    std::vector<double> x0;  // empty = problem default

    // run.*
    std::string scheme = "bs2";
    std::string phi = "cos";
    double T = 1.0;
    std::vector<double> h_list{0.2, 0.1, 0.05};
    double h = 0.0625;       // single-step-size commands
    long long M = 10000;
    double h_ref = 1e-3;
    long long M_ref = 0;     // 0 = same as M
    std::uint64_t seed = 12345;
    int threads = 0;         // 0 = SDE_WEAK_LAB_THREADS or hardware
    std::string out_dir = ".";
    std::string tag;         // output file prefix; default derived from the run
    std::string integral_mode = "weak_substitute";
    double p = 2.0;          // moment order (moment-trace)
    int s = 1;               // product order (one-step)

    // map.* (check-maps)
    std::string map_family = "balanced";
    double map_alpha = 1.0;
    double map_power = 2.0;
    int map_theta = 1;
    double map_varsigma = 0.5;
    long long map_samples = 100000;
    double map_z_radius = 100.0;
    int map_dim = 1;
    std::vector<double> map_h_grid{0.5, 0.25, 0.125, 0.0625, 0.03125};

    static RunConfig from_keys(const KeyValues& keys);
    KeyValues to_keys() const;

    /// Initial condition resolved against the problem defaults.
    std::vector<double> resolved_x0() const;
    std::string resolved_tag() const;
};

/// Exit statuses of run(): 0 success, 1 config error,
/// 2 statistically-unresolved order fit.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitUnresolved = 2;

/// Executes the configured command, writing CSV/manifest/plot data under
/// out_dir.
int run(const RunConfig& config);

}  // namespace sdelab
