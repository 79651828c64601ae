#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "capsim/errors.hpp"
#include "capsim/quantum_state.hpp"
#include "capsim/reduction.hpp"
#include "capsim/scenario.hpp"

namespace capsim::io {

inline constexpr int kFormatVersion = 1;

struct GridConfig {
    std::size_t n_points = 4096;
    double length = 0.0;
    double origin = 0.0;

    bool operator==(const GridConfig&) const = default;
};

struct CalibrationConfig {
    bool enabled = false;
    double target = 0.999;
    double tolerance = 1e-3;
    int max_iter = 60;

    bool operator==(const CalibrationConfig&) const = default;
};

struct TrialsConfig {
    std::size_t n_trials = 10000;
    std::uint64_t base_seed = 1;

    bool operator==(const TrialsConfig&) const = default;
};

struct AnalysisConfig {
    double threshold_ratio = kZeroCurrentRatio;
    std::size_t histogram_bins = 100;

    bool operator==(const AnalysisConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    std::size_t snapshot_stride = 0;
    std::vector<std::string> formats{"csv", "json"};

    bool wants(const std::string& format) const;
    bool operator==(const OutputConfig&) const = default;
};

struct SweepConfig {
    std::string key;
    std::vector<std::string> values;

    bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
    int format_version = kFormatVersion;
    GridConfig grid;
    ScenarioSpec scenario;
    CalibrationConfig calibration;
    std::vector<ReductionRule> rules;
    TrialsConfig trials;
    AnalysisConfig analysis;
    OutputConfig output;
    std::optional<SweepConfig> sweep;

    Grid1D make_grid() const { return build_grid(grid.n_points, grid.length, grid.origin); }
    bool operator==(const RunConfig&) const = default;
};

/// Malformed text: carries the 1-based line and column of the offending character.
class ConfigSyntaxError : public ValidationError {
public:
    ConfigSyntaxError(const std::string& message, std::size_t line, std::size_t column);

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// "section.key" = value, applied on top of the parsed text (for --seed, sweeps).
struct ConfigOverride {
    std::string key;
    std::string value;
};

/// Parses and fully validates a run configuration. Throws ConfigSyntaxError for
/// malformed text and ConfigError listing every violated field otherwise.
RunConfig parse_config(const std::string& text, const std::vector<ConfigOverride>& overrides = {});

/// Reads a file and parses it.
RunConfig load_config(const std::string& path, const std::vector<ConfigOverride>& overrides = {});

/// Canonical text form: every field explicit, doubles in shortest round-trip form.
std::string serialize_config(const RunConfig& config);

}  // namespace capsim::io
