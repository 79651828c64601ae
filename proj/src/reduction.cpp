#include "capsim/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "capsim/errors.hpp"

namespace capsim {

std::string to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::PenroseEnv: return "penrose_env";
        case RuleKind::PenroseSpread: return "penrose_spread";
        case RuleKind::CurrentJump: return "current_jump";
    }
    return "unknown";
}

RuleKind rule_kind_from_string(const std::string& name) {
    if (name == "penrose_env") return RuleKind::PenroseEnv;
    if (name == "penrose_spread") return RuleKind::PenroseSpread;
    if (name == "current_jump") return RuleKind::CurrentJump;
    throw ValidationError("unknown reduction rule '" + name + "'");
}

ReductionRule::ReductionRule(RuleKind kind, std::optional<double> tau_env, double onset_epsilon)
    : kind_(kind), tau_env_(tau_env), onset_epsilon_(onset_epsilon) {
    if (!(onset_epsilon > 0.0)) throw ValidationError("onset_epsilon must be positive");
    if (tau_env_ && !(*tau_env_ > 0.0)) throw ValidationError("tau_env must be positive");
}

ReductionRule ReductionRule::penrose_env(double tau_env, double onset_epsilon) {
    return {RuleKind::PenroseEnv, tau_env, onset_epsilon};
}

ReductionRule ReductionRule::penrose_spread(double onset_epsilon) {
    return {RuleKind::PenroseSpread, std::nullopt, onset_epsilon};
}

ReductionRule ReductionRule::current_jump(double onset_epsilon) {
    return {RuleKind::CurrentJump, std::nullopt, onset_epsilon};
}

std::string to_string(Component c) { return c == Component::Capture ? "capture" : "no_capture"; }

std::string flags_to_string(unsigned flags) {
    std::string out;
    auto add = [&](TrialFlag f, const char* name) {
        if ((flags & f) == 0) return;
        if (!out.empty()) out += '|';
        out += name;
    };
    add(kZeroWeightCollapse, "zero_weight_collapse");
    add(kZeroCurrentCollapse, "zero_current_collapse");
    add(kBetweenPulses, "between_pulses");
    return out;
}

unsigned flags_from_string(const std::string& text) {
    unsigned flags = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto next = text.find('|', pos);
        if (next == std::string::npos) next = text.size();
        const auto name = text.substr(pos, next - pos);
        if (name == "zero_weight_collapse") flags |= kZeroWeightCollapse;
        else if (name == "zero_current_collapse") flags |= kZeroCurrentCollapse;
        else if (name == "between_pulses") flags |= kBetweenPulses;
        else if (!name.empty()) throw ValidationError("unknown trial flag '" + name + "'");
        pos = next + 1;
    }
    return flags;
}

double uniform_from_seed(std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    // Top 53 bits, shifted off zero by half an ulp.
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1p-53;
}

std::optional<double> capture_onset(const ComponentWeights& weights, double onset_epsilon) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights.p_capture[i] > onset_epsilon) return weights.times[i];
    }
    return std::nullopt;
}

std::optional<double> collapse_time_env(const ComponentWeights& weights, const ReductionRule& rule) {
    if (rule.kind() != RuleKind::PenroseEnv) throw ValidationError("collapse_time_env needs penrose_env");
    if (weights.empty()) return std::nullopt;
    const double tau = *rule.tau_env();
    const double t0 = weights.times.front();
    const double span = weights.times.back() - t0;
    if (tau > span) return std::nullopt;
    if (weights.size() > 1 && tau < weights.times[1] - t0) return t0;
    return t0 + tau;
}

std::optional<double> collapse_time_spread(const ComponentWeights& weights, const EnergyMoments& moments,
                                           const ReductionRule& rule) {
    if (rule.kind() != RuleKind::PenroseSpread) {
        throw ValidationError("collapse_time_spread needs penrose_spread");
    }
    if (!(moments.energy_spread > 0.0)) return std::nullopt;
    const auto onset = capture_onset(weights, rule.onset_epsilon());
    if (!onset) return std::nullopt;
    const double t = *onset + 1.0 / moments.energy_spread;
    if (t > weights.times.back()) return std::nullopt;
    return t;
}

unsigned collapse_flags(double t, Component chosen, double p_capture, double current, double peak_current,
                        const TrialContext& context) {
    unsigned flags = 0;
    if (p_capture < context.rule.onset_epsilon()) flags |= kZeroWeightCollapse;
    if (chosen == Component::Capture && current < kZeroCurrentRatio * peak_current) {
        flags |= kZeroCurrentCollapse;
    }
    if (context.zero_current_window && context.zero_current_window->contains(t)) flags |= kBetweenPulses;
    return flags;
}

TrialRecord sample_jump_collapse(const ComponentWeights& weights, std::uint64_t seed,
                                 const TrialContext& context) {
    TrialRecord rec;
    rec.rule = RuleKind::CurrentJump;
    rec.seed = seed;
    if (weights.empty()) return rec;

    const double u = uniform_from_seed(seed);
    const auto& p1 = weights.p_capture;
    if (u > p1.back()) {
        rec.p_capture_at_collapse = p1.back();
        return rec;
    }
    // P1 is non-decreasing, so the samples are partitioned by P1 < u.
    const auto it = std::partition_point(p1.begin(), p1.end(), [u](double p) { return p < u; });
    const auto hi = static_cast<std::size_t>(it - p1.begin());
    double t = weights.times[hi];
    if (hi > 0 && p1[hi] > p1[hi - 1]) {
        const double f = (u - p1[hi - 1]) / (p1[hi] - p1[hi - 1]);
        t = weights.times[hi - 1] + f * (weights.times[hi] - weights.times[hi - 1]);
    }
    rec.collapse_time = t;
    rec.chosen = Component::Capture;
    rec.p_capture_at_collapse = interpolate(weights.times, weights.p_capture, t);
    rec.current_at_collapse = interpolate(weights.times, weights.current, t);
    rec.flags = collapse_flags(t, rec.chosen, rec.p_capture_at_collapse, rec.current_at_collapse,
                               weights.peak_current(), context);
    return rec;
}

TrialRecord resolve_outcome(double collapse_time, const ComponentWeights& weights, std::uint64_t seed,
                            const TrialContext& context) {
    TrialRecord rec;
    rec.rule = context.rule.kind();
    rec.seed = seed;
    rec.collapse_time = collapse_time;
    rec.p_capture_at_collapse = interpolate(weights.times, weights.p_capture, collapse_time);
    rec.current_at_collapse = interpolate(weights.times, weights.current, collapse_time);

    // Born weights at the collapse instant, relative to the total surviving weight.
    const double p0 = interpolate(weights.times, weights.p_no_capture, collapse_time);
    const double p1 = std::max(0.0, rec.p_capture_at_collapse);
    const double total = p0 + p1;
    const double capture_probability = total > 0.0 ? p1 / total : 0.0;
    const double u = uniform_from_seed(seed);
    rec.chosen = u < capture_probability ? Component::Capture : Component::NoCapture;
    rec.flags = collapse_flags(collapse_time, rec.chosen, rec.p_capture_at_collapse, rec.current_at_collapse,
                               weights.peak_current(), context);
    return rec;
}

namespace {

TrialRecord run_one(const ComponentWeights& weights, const std::optional<double>& deterministic_time,
                    const TrialContext& context, std::uint64_t seed) {
    if (context.rule.kind() == RuleKind::CurrentJump) return sample_jump_collapse(weights, seed, context);
    if (!deterministic_time) {
        TrialRecord rec;
        rec.rule = context.rule.kind();
        rec.seed = seed;
        rec.p_capture_at_collapse = weights.empty() ? 0.0 : weights.p_capture.back();
        return rec;
    }
    return resolve_outcome(*deterministic_time, weights, seed, context);
}

}  // namespace

std::vector<TrialRecord> run_trials(const ComponentWeights& weights, const EnergyMoments& moments,
                                    const TrialContext& context, std::uint64_t base_seed,
                                    std::size_t n_trials, unsigned threads) {
    std::optional<double> deterministic_time;
    if (context.rule.kind() == RuleKind::PenroseEnv) {
        deterministic_time = collapse_time_env(weights, context.rule);
    } else if (context.rule.kind() == RuleKind::PenroseSpread) {
        deterministic_time = collapse_time_spread(weights, moments, context.rule);
    }

    std::vector<TrialRecord> records(n_trials);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            records[i] = run_one(weights, deterministic_time, context, base_seed + i);
        }
    };
    threads = std::max(1u, threads);
    if (threads == 1 || n_trials < 2 * threads) {
        work(0, n_trials);
        return records;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n_trials + threads - 1) / threads;
    for (std::size_t begin = 0; begin < n_trials; begin += chunk) {
        pool.emplace_back(work, begin, std::min(n_trials, begin + chunk));
    }
    pool.clear();
    return records;
}

}  // namespace capsim
