#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "capsim/propagator.hpp"
#include "capsim/reduction.hpp"

namespace capsim::io {

// Column layouts are fixed; readers reject anything else.
inline constexpr const char* kWeightsHeader = "time,p_no_capture,p_capture,current";
inline constexpr const char* kTrialsHeader =
    "seed,rule,collapse_time,chosen,p_capture_at_collapse,current_at_collapse,flags";

/// Leading "# key=value" lines. format_version is always written first.
using Metadata = std::map<std::string, std::string>;

void write_weights_csv(std::ostream& out, const ComponentWeights& weights, const Metadata& metadata = {});

struct WeightsFile {
    ComponentWeights weights;
    Metadata metadata;
};

WeightsFile read_weights_csv(const std::string& path);
WeightsFile parse_weights_csv(const std::string& text);

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records);
std::vector<TrialRecord> parse_trials_csv(const std::string& text);

/// Long format: time,x,density per grid point.
void write_snapshots_csv(std::ostream& out, const Grid1D& grid, std::span<const Snapshot> snapshots);

}  // namespace capsim::io
