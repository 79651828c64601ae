#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capsim/propagator.hpp"
#include "capsim/reduction.hpp"

namespace capsim {

struct WindowReport {
    double window_start = 0.0;
    double window_end = 0.0;
    double peak_current = 0.0;
    double window_max_current = 0.0;
    bool exists = false;

    std::optional<TimeInterval> interval() const {
        if (!exists) return std::nullopt;
        return TimeInterval{window_start, window_end};
    }
};

/// Local maxima of J above 10% of the global maximum, at least 10 samples apart,
/// ordered by height (largest first).
std::vector<std::size_t> find_current_peaks(std::span<const double> current);

/// Peak time refined by a parabola through the peak sample and its neighbours.
double refine_peak_time(const ComponentWeights& weights, std::size_t index);

/// Longest run of samples strictly between the two largest current peaks with
/// J < threshold_ratio * peak J. exists = false when fewer than two peaks are found.
WindowReport detect_zero_current_window(const ComponentWeights& weights,
                                        double threshold_ratio = kZeroCurrentRatio);

/// First and last sample with J >= threshold_ratio * peak J; nullopt when J is identically zero.
std::optional<TimeInterval> active_current_interval(const ComponentWeights& weights,
                                                    double threshold_ratio = kZeroCurrentRatio);

/// Sup-distance between the empirical CDF of `samples` and P1(t) / P1(t_final).
double ks_distance(std::span<const double> samples, const ComponentWeights& cdf);

struct HistogramBin {
    double bin_start = 0.0;
    double bin_end = 0.0;
    std::size_t count = 0;
};

struct BatchSummary {
    RuleKind rule = RuleKind::CurrentJump;
    std::size_t n_trials = 0;
    double capture_fraction = 0.0;
    std::optional<double> ks_distance;  // current_jump only
    std::map<std::string, std::size_t> flag_counts;
    std::vector<HistogramBin> collapse_time_histogram;
};

inline constexpr std::size_t kDefaultHistogramBins = 100;

/// Aggregates one rule's trials. between_pulses is recomputed against `window`.
/// An empty histogram is returned when no trial collapsed.
BatchSummary summarize_batch(std::span<const TrialRecord> records, const ComponentWeights& weights,
                             const WindowReport& window, std::size_t bins = kDefaultHistogramBins);

/// Standard deviation of the arrival-time distribution J(t) / integral J.
double current_time_spread(const ComponentWeights& weights);

/// Trapezoid integral of J from the first sample up to each sample.
std::vector<double> integrated_current(const ComponentWeights& weights);

}  // namespace capsim
