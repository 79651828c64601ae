#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "capsim/analysis.hpp"
#include "capsim/io/config.hpp"
#include "capsim/io/report.hpp"
#include "capsim/propagator.hpp"
#include "capsim/reduction.hpp"
#include "capsim/scenario.hpp"

namespace capsim::io {

struct RuleBatch {
    ReductionRule rule;
    std::optional<double> deterministic_collapse;  // Penrose rules only
    std::vector<TrialRecord> records;
    BatchSummary summary;
};

struct PhaseTimes {
    double calibrate = 0.0;
    double evolve = 0.0;
    double reduce = 0.0;
    double analyze = 0.0;
    double emit = 0.0;
};

/// Everything computed by one pipeline pass (calibrate, evolve, reduce, analyze).
struct ExperimentResult {
    RunConfig config;  // as run: detector strength replaced by the calibrated one
    std::optional<CalibrationResult> calibration;
    EnergyMoments moments;
    EvolutionResult evolution;
    WindowReport window{};
    std::optional<TimeInterval> active_interval{};
    std::optional<double> capture_onset{};
    std::vector<double> peak_times{};  // refined, in time order
    std::vector<RuleBatch> batches{};
    std::vector<Claim> claims{};
    PhaseTimes times{};

    const RuleBatch* batch(RuleKind kind) const;
};

// Thresholds used by the claim report.
inline constexpr double kAccountingTolerance = 1e-6;
inline constexpr double kMonotoneTolerance = 1e-8;
inline constexpr double kCurrentConsistencyTolerance = 1e-5;
inline constexpr double kKsThreshold = 0.02;
inline constexpr double kBetweenPulsesJumpLimit = 1e-3;
// Run must end with J below this fraction of peak J (trailing pulse has transited).
inline constexpr double kTransitCompleteRatio = 1e-8;

/// Runs the pipeline in memory. Throws ValidationError / NumericalGuardError.
ExperimentResult execute_experiment(const RunConfig& config, unsigned threads = 1);

/// Claim report for a computed experiment.
std::vector<Claim> evaluate_claims(const ExperimentResult& result);

struct FileRecord {
    std::string name;
    std::uint32_t crc32 = 0;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string config_text;
    std::optional<CalibrationResult> calibration;
    std::string code_version;
    PhaseTimes wall_times;
    std::vector<FileRecord> files;
};

enum class EmitMode { Full, ClaimsOnly };

/// Pipeline plus file emission into out_dir; the manifest is written last.
/// On failure every file this call wrote is removed.
RunManifest run_experiment(const RunConfig& config, const std::string& out_dir, unsigned threads = 1,
                           EmitMode mode = EmitMode::Full);

struct SweepRow {
    std::string value;
    double energy_spread = 0.0;
    double total_capture = 0.0;
    std::optional<double> peak_separation;
    WindowReport window;
};

/// Re-runs the pipeline once per value of `key` (a "section.field" override),
/// each into out_dir/<key>=<value>/, and writes out_dir/sweep.csv.
std::vector<SweepRow> run_sweep(const std::string& config_text, const std::vector<ConfigOverride>& base_overrides,
                                const std::string& key, const std::vector<std::string>& values,
                                const std::string& out_dir, unsigned threads = 1);

nlohmann::ordered_json calibration_json(const CalibrationResult& calibration);
nlohmann::ordered_json summary_json(const ExperimentResult& result);
nlohmann::ordered_json manifest_json(const RunManifest& manifest);

}  // namespace capsim::io
