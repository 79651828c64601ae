#include "capsim/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "capsim/errors.hpp"

namespace capsim {

std::vector<std::size_t> find_current_peaks(std::span<const double> current) {
    constexpr double kRelativeHeight = 0.1;
    constexpr std::size_t kMinSeparation = 10;
    std::vector<std::size_t> candidates;
    if (current.size() < 3) return candidates;
    const double global = *std::max_element(current.begin(), current.end());
    if (!(global > 0.0)) return candidates;

    for (std::size_t i = 0; i < current.size(); ++i) {
        const double left = i > 0 ? current[i - 1] : -1.0;
        const double right = i + 1 < current.size() ? current[i + 1] : -1.0;
        if (current[i] >= left && current[i] > right && current[i] >= kRelativeHeight * global) {
            candidates.push_back(i);
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return current[a] > current[b]; });
    std::vector<std::size_t> peaks;
    for (auto c : candidates) {
        const bool separated = std::all_of(peaks.begin(), peaks.end(), [&](std::size_t p) {
            return (c > p ? c - p : p - c) >= kMinSeparation;
        });
        if (separated) peaks.push_back(c);
    }
    return peaks;
}

double refine_peak_time(const ComponentWeights& weights, std::size_t index) {
    const auto& j = weights.current;
    const auto& t = weights.times;
    if (index == 0 || index + 1 >= j.size()) return t[index];
    const double h_left = t[index] - t[index - 1];
    const double h_right = t[index + 1] - t[index];
    if (std::abs(h_left - h_right) > 1e-9 * h_left) return t[index];
    const double denom = j[index - 1] - 2.0 * j[index] + j[index + 1];
    if (denom >= 0.0) return t[index];
    return t[index] + 0.5 * h_left * (j[index - 1] - j[index + 1]) / denom;
}

WindowReport detect_zero_current_window(const ComponentWeights& weights, double threshold_ratio) {
    WindowReport report;
    const auto& j = weights.current;
    report.peak_current = weights.peak_current();
    const auto peaks = find_current_peaks(j);
    if (peaks.size() < 2) return report;

    const auto first = std::min(peaks[0], peaks[1]);
    const auto second = std::max(peaks[0], peaks[1]);
    const double threshold = threshold_ratio * report.peak_current;

    std::size_t best_begin = 0;
    std::size_t best_len = 0;
    std::size_t run_begin = 0;
    std::size_t run_len = 0;
    for (std::size_t i = first + 1; i < second; ++i) {
        if (j[i] < threshold) {
            if (run_len == 0) run_begin = i;
            ++run_len;
            if (run_len > best_len) {
                best_len = run_len;
                best_begin = run_begin;
            }
        } else {
            run_len = 0;
        }
    }
    if (best_len == 0) return report;

    const auto best_end = best_begin + best_len - 1;
    report.window_start = weights.times[best_begin];
    report.window_end = weights.times[best_end];
    report.window_max_current =
        *std::max_element(j.begin() + static_cast<std::ptrdiff_t>(best_begin),
                          j.begin() + static_cast<std::ptrdiff_t>(best_end) + 1);
    report.exists = report.window_max_current < threshold && report.window_end > report.window_start;
    return report;
}

std::optional<TimeInterval> active_current_interval(const ComponentWeights& weights, double threshold_ratio) {
    const double peak = weights.peak_current();
    if (!(peak > 0.0)) return std::nullopt;
    const double threshold = threshold_ratio * peak;
    std::optional<std::size_t> first;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights.current[i] >= threshold) {
            if (!first) first = i;
            last = i;
        }
    }
    return TimeInterval{weights.times[*first], weights.times[last]};
}

double ks_distance(std::span<const double> samples, const ComponentWeights& cdf) {
    if (samples.empty()) throw ValidationError("ks_distance: empty sample set");
    if (cdf.empty() || !(cdf.p_capture.back() > 0.0)) {
        throw ValidationError("ks_distance: reference CDF has no capture weight");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double norm = cdf.p_capture.back();
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = interpolate(cdf.times, cdf.p_capture, sorted[i]) / norm;
        const double above = static_cast<double>(i + 1) / n - f;
        const double below = f - static_cast<double>(i) / n;
        d = std::max({d, above, below});
    }
    return d;
}

BatchSummary summarize_batch(std::span<const TrialRecord> records, const ComponentWeights& weights,
                             const WindowReport& window, std::size_t bins) {
    BatchSummary summary;
    summary.n_trials = records.size();
    summary.flag_counts = {{"zero_weight_collapse", 0}, {"zero_current_collapse", 0}, {"between_pulses", 0}};
    if (records.empty()) return summary;

    summary.rule = records.front().rule;
    const auto interval = window.interval();
    std::size_t captures = 0;
    std::vector<double> collapse_times;
    std::vector<double> capture_times;
    for (const auto& r : records) {
        if (r.rule != summary.rule) throw ValidationError("summarize_batch: records mix reduction rules");
        if (r.chosen == Component::Capture) ++captures;
        const bool between = r.collapse_time && interval && interval->contains(*r.collapse_time);
        if (r.has(kZeroWeightCollapse)) ++summary.flag_counts["zero_weight_collapse"];
        if (r.has(kZeroCurrentCollapse)) ++summary.flag_counts["zero_current_collapse"];
        if (between) ++summary.flag_counts["between_pulses"];
        if (r.collapse_time) {
            collapse_times.push_back(*r.collapse_time);
            if (r.chosen == Component::Capture) capture_times.push_back(*r.collapse_time);
        }
    }
    summary.capture_fraction = static_cast<double>(captures) / static_cast<double>(records.size());

    if (summary.rule == RuleKind::CurrentJump && !capture_times.empty() && !weights.empty() &&
        weights.p_capture.back() > 0.0) {
        summary.ks_distance = ks_distance(capture_times, weights);
    }

    if (!collapse_times.empty() && bins > 0 && !weights.empty()) {
        const double lo = weights.times.front();
        const double hi = weights.times.back();
        const double width = (hi - lo) / static_cast<double>(bins);
        summary.collapse_time_histogram.resize(bins);
        for (std::size_t b = 0; b < bins; ++b) {
            summary.collapse_time_histogram[b].bin_start = lo + static_cast<double>(b) * width;
            summary.collapse_time_histogram[b].bin_end = lo + static_cast<double>(b + 1) * width;
        }
        for (double t : collapse_times) {
            auto b = width > 0.0 ? static_cast<std::ptrdiff_t>(std::floor((t - lo) / width)) : 0;
            b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
            ++summary.collapse_time_histogram[static_cast<std::size_t>(b)].count;
        }
    }
    return summary;
}

double current_time_spread(const ComponentWeights& weights) {
    double total = 0.0;
    double first = 0.0;
    for (std::size_t i = 1; i < weights.size(); ++i) {
        const double h = weights.times[i] - weights.times[i - 1];
        const double jm = 0.5 * (weights.current[i] + weights.current[i - 1]);
        const double tm = 0.5 * (weights.times[i] + weights.times[i - 1]);
        total += jm * h;
        first += jm * tm * h;
    }
    if (!(total > 0.0)) return 0.0;
    const double mean = first / total;
    double second = 0.0;
    for (std::size_t i = 1; i < weights.size(); ++i) {
        const double h = weights.times[i] - weights.times[i - 1];
        const double jm = 0.5 * (weights.current[i] + weights.current[i - 1]);
        const double d = 0.5 * (weights.times[i] + weights.times[i - 1]) - mean;
        second += jm * d * d * h;
    }
    return std::sqrt(second / total);
}

std::vector<double> integrated_current(const ComponentWeights& weights) {
    std::vector<double> out(weights.size(), 0.0);
    for (std::size_t i = 1; i < weights.size(); ++i) {
        const double h = weights.times[i] - weights.times[i - 1];
        out[i] = out[i - 1] + 0.5 * h * (weights.current[i] + weights.current[i - 1]);
    }
    return out;
}

}  // namespace capsim
