#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "specflow/params.hpp"

namespace specflow {

using json = nlohmann::ordered_json;

/// Parse a plain-text key=value file ('#' starts a comment). Keys are kept
/// as strings; callers interpret them.
std::map<std::string, std::string> read_key_value_file(const std::string& path);
std::map<std::string, std::string> parse_key_value_text(const std::string& text);

/// Harness configuration: model parameters plus experiment knobs.
struct RunConfig {
    GeometricLorenzParams params;
    std::uint64_t seed = 2026;
    std::vector<double> t_sweep = {30.0, 50.0, 80.0};
    double grid_h = 1e-4;        // Sigma grid resolution of the gluing search
    double mu = 0.2;             // stable-leaf half length / time thickening
    double mu_u = 0.1;           // unstable coordinate half range of the chart
    double delta_seed = 1e-8;    // separatrix seed offset
    double t1 = 20.0;            // backward window at the singularity
    double t2 = 20.0;            // forward window along the glued orbit piece
    std::string out_dir = "out";

    static RunConfig from_file(const std::string& path);
    static RunConfig from_kv(const std::map<std::string, std::string>& kv);
    /// Canonical key=value serialization (sorted keys, %.17g values).
    std::string canonical_text() const;
    /// FNV-1a hash of the canonical text (hex), stamped into every report.
    std::string hash() const;
};

std::string fnv1a_hex(const std::string& data);

/// Named scalar outcomes pinned with tolerances, stamped with the producing
/// config hash. Used to freeze pipeline scalars (rates, clearances, d_star,
/// projected point counts) as regression values.
struct RegressionBaseline {
    std::string config_hash;
    struct Entry {
        double value = 0.0;
        double rel_tol = 0.05;
    };
    std::map<std::string, Entry> values;

    json to_json() const;
    static RegressionBaseline from_json(const json& j);
    /// Returns human-readable violations (empty when everything matches).
    std::vector<std::string> compare(const std::map<std::string, double>& measured,
                                     const std::string& measured_hash) const;
};

/// Write JSON with a trailing newline, creating parent directories.
void write_json(const json& j, const std::string& path);
json read_json(const std::string& path);

void write_text(const std::string& text, const std::string& path);
std::string read_text(const std::string& path);

}  // namespace specflow
