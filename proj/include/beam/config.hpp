#pragma once

// Run configuration: one JSON document per run. See docs/config.md for the
// schema. Relative paths are resolved against the config file's directory
// and stored absolute, so the emitted effective config re-parses anywhere.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "beam/dynamics.hpp"
#include "beam/spectral_core.hpp"

namespace beam {

struct KernelSpec {
    std::string type = "exponential";  // none | exponential | tabulated
    double delta = 1.0;
    double kappa = 0.5;
    /// JSON file {"ds": F, "samples": [...]} (tabulated only).
    std::optional<std::string> table;

    bool operator==(const KernelSpec&) const = default;
};

struct HistorySpec {
    std::string type = "zero";  // zero | table | snapshot
    /// table: JSON file {"ds": F, "eta": [[...], ...]}; snapshot: a final_state.json.
    std::optional<std::string> path;

    bool operator==(const HistorySpec&) const = default;
};

struct InitialSpec {
    std::vector<double> c;
    std::vector<double> cdot;
    HistorySpec history;
    /// When set, a seeded draw from the H_0 ball of this radius is added to (c, cdot).
    std::optional<double> random_radius;

    bool operator==(const InitialSpec&) const = default;
};

struct RunConfig {
    std::size_t modes = kDefaultModes;
    double beta = 0.0;
    double k = 0.0;
    std::vector<double> f_modes;
    KernelSpec kernel;
    IntegratorConfig integrator;
    InitialSpec initial;
    std::uint64_t seed = 0;
    std::optional<double> phi_eps;

    BeamParams params() const;
    MemoryKernel build_kernel() const;
    /// Reads history/snapshot files and applies the random draw.
    InitialData build_initial() const;
    SimulationOptions simulation_options() const;

    /// Builds every object above and runs the integrator checks.
    /// Throws std::invalid_argument on the first violation.
    void validate() const;

    bool operator==(const RunConfig&) const = default;
};

/// Throws std::invalid_argument on unknown keys, wrong types or failed validation.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Fully expanded config (all defaults written out).
nlohmann::json to_json(const RunConfig& cfg);

/// Reads a JSON file; throws std::invalid_argument if missing or malformed.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace beam
