#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dvz/covering.hpp"
#include "dvz/lengths.hpp"

namespace dvz {

enum class Command { cover, density, fourier, convolve, kernel, conditions, dimension, verify };

const char* to_string(Command c);
Command command_from_string(const std::string& s);

/// One experiment run. Output paths and the thread count are not part of the
/// configuration hash; every other field is.
struct ExperimentConfig {
    Command command = Command::cover;
    nlohmann::json family = {{"family", "alpha"}, {"alpha", 0.5}};

    std::int64_t n = 1000;
    std::vector<std::int64_t> n_list;   // convolve / verify levels; empty means {n}
    std::int64_t grid = 4096;
    int d = 1;
    double delta = 0.1;
    std::optional<double> eta;
    std::vector<double> delta_list;     // ln-delta ladder; empty means {delta}
    std::int64_t k_max = 0;             // 0: G/2
    int band_lo = 4;                    // first dyadic band 2^band_lo
    std::uint64_t seed = 1;             // base seed
    std::int64_t seeds = 1;
    std::int64_t mc = 10000;
    std::uint64_t mc_seed = 7;
    std::vector<std::string> checks;    // conditions: A, B, shepp, eq3
    std::string check;                  // verify: ln-delta, jn-cauchy, h-product, dominated-bound, pair-correlation
    int scale_lo = 6;                   // dimension scales 2^-scale_lo .. 2^-scale_hi
    int scale_hi = 14;
    double anchor = 0.0;
    std::vector<double> t_hat;
    std::vector<double> t_hat_prime;
    std::vector<double> omegas;         // fixture omegas; non-empty overrides seeded sampling

    std::string emit;
    std::string manifest;               // default: emit + ".manifest.json"
    int threads = 0;                    // 0: default parallelism

    /// Throws ValidationError naming the offending field.
    void validate() const;
    LengthSequence sequence() const;

    nlohmann::json to_json() const;
    /// Missing keys keep their defaults; unknown keys are rejected.
    static ExperimentConfig from_json(const nlohmann::json& j);
    /// The semantically meaningful part of to_json().
    nlohmann::json canonical() const;
    std::uint64_t hash() const;
};

struct OutputRecord {
    std::string path;
    std::uint64_t checksum = 0;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    ExperimentConfig config;
    std::string config_hash;
    std::string tool_version;
    std::vector<OutputRecord> outputs;
    double wall_clock_seconds = 0.0;
    nlohmann::json summary = nlohmann::json::object();

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

/// Dispatches to the owning module, writes the outputs and the manifest.
RunManifest run(const ExperimentConfig& config);

struct RerunReport {
    RunManifest rerun;
    std::vector<std::string> mismatched; // paths whose checksum differs
    bool identical() const { return mismatched.empty(); }
};

/// Re-executes a manifest. With out_dir set the outputs go there under their
/// original file names; otherwise the original paths are overwritten.
RerunReport rerun_manifest(const std::string& manifest_path, const std::optional<std::string>& out_dir = {});

/// JSON list of reals in [0, 1).
CoveringSample load_omegas_file(const std::string& path);
CoveringSample omegas_from_json(const nlohmann::json& j);

std::uint64_t file_checksum(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace dvz
