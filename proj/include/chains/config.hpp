#pragma once

#include <set>
#include <string>

#include "chains/types.hpp"

namespace chains {

// Flat run configuration.  Every key in the JSON config file mirrors a CLI
// flag; flags win on conflict.  Zero means "derive the default" for domain_L
// (max(6,3k)/beta), y_extent (3k/beta) and y3_span (beta).
struct RunConfig {
    int k = 2;
    int l = 0;
    double c_abs = 1.0;
    double c_phase = 0.0;
    double beta = 2 * pi;

    double domain_L = 0.0;
    int grid_nr = 64;
    int grid_nt = 64;

    double tol = 1e-8;
    long max_steps = 2000000;

    double y_extent = 0.0;
    int y_points = 33;
    int y3_points = 16;
    double y3_span = 0.0;

    std::set<std::string> stages = {"spectral", "toda", "nahm"};
    std::string output_dir = ".";
    std::set<std::string> formats = {"csv", "json"};
    bool checkpoint = false;

    int threads = 0;
    unsigned long long seed = 12345;

    bool operator==(const RunConfig&) const = default;
};

std::string serialize_config(const RunConfig& c);
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);

// comma-separated set helpers used by both the config format and the CLI
std::string join_set(const std::set<std::string>& s);
std::set<std::string> split_set(const std::string& csv);

}  // namespace chains
