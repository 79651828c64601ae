#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "capsim/propagator.hpp"
#include "capsim/quantum_state.hpp"

namespace capsim {

enum class RuleKind {
    PenroseEnv,     // deadline tau_env (environmental Delta E), from the start of the record
    PenroseSpread,  // deadline 1/Delta E (packet energy spread), from onset of the capture branch
    CurrentJump,    // jump with hazard J/P0, sampled by inverting P1(t)
};

std::string to_string(RuleKind kind);
RuleKind rule_kind_from_string(const std::string& name);

inline constexpr double kDefaultTauEnv = 1e-6;
inline constexpr double kDefaultOnsetEpsilon = 1e-9;
// J below this fraction of the record's peak current counts as "no current".
inline constexpr double kZeroCurrentRatio = 1e-6;

class ReductionRule {
public:
    static ReductionRule penrose_env(double tau_env = kDefaultTauEnv,
                                     double onset_epsilon = kDefaultOnsetEpsilon);
    static ReductionRule penrose_spread(double onset_epsilon = kDefaultOnsetEpsilon);
    static ReductionRule current_jump(double onset_epsilon = kDefaultOnsetEpsilon);

    RuleKind kind() const { return kind_; }
    /// Present iff kind() == PenroseEnv.
    std::optional<double> tau_env() const { return tau_env_; }
    double onset_epsilon() const { return onset_epsilon_; }

    bool operator==(const ReductionRule&) const = default;

private:
    ReductionRule(RuleKind kind, std::optional<double> tau_env, double onset_epsilon);

    RuleKind kind_;
    std::optional<double> tau_env_;
    double onset_epsilon_;
};

enum class Component { NoCapture, Capture };

std::string to_string(Component c);

enum TrialFlag : unsigned {
    kZeroWeightCollapse = 1u << 0,
    kZeroCurrentCollapse = 1u << 1,
    kBetweenPulses = 1u << 2,
};

/// "zero_weight_collapse|between_pulses", empty for no flags.
std::string flags_to_string(unsigned flags);
unsigned flags_from_string(const std::string& text);

struct TimeInterval {
    double start = 0.0;
    double end = 0.0;

    bool contains(double t) const { return t >= start && t <= end; }
    bool operator==(const TimeInterval&) const = default;
};

struct TrialRecord {
    RuleKind rule = RuleKind::CurrentJump;
    std::optional<double> collapse_time;
    Component chosen = Component::NoCapture;
    double p_capture_at_collapse = 0.0;
    double current_at_collapse = 0.0;
    unsigned flags = 0;
    std::uint64_t seed = 0;

    bool has(TrialFlag f) const { return (flags & f) != 0; }
    bool operator==(const TrialRecord&) const = default;
};

/// Uniform draw in the open interval (0, 1), a pure function of the seed.
double uniform_from_seed(std::uint64_t seed);

/// First sample time with P1 > onset_epsilon, if any.
std::optional<double> capture_onset(const ComponentWeights& weights, double onset_epsilon);

/// t0 + tau_env, snapped to the first sample when tau_env is below the record's
/// sample spacing. nullopt when tau_env exceeds the record.
std::optional<double> collapse_time_env(const ComponentWeights& weights, const ReductionRule& rule);

/// t_onset + 1/Delta E. nullopt when Delta E = 0, no onset exists, or the deadline
/// falls past the record.
std::optional<double> collapse_time_spread(const ComponentWeights& weights, const EnergyMoments& moments,
                                           const ReductionRule& rule);

/// Context shared by every trial of one batch.
struct TrialContext {
    ReductionRule rule = ReductionRule::current_jump();
    std::optional<TimeInterval> zero_current_window;
};

/// Inverse-CDF sample of the capture time: collapse at the first t with P1(t) >= u.
TrialRecord sample_jump_collapse(const ComponentWeights& weights, std::uint64_t seed,
                                 const TrialContext& context = {});

/// Born-weighted choice between components at a fixed collapse time.
TrialRecord resolve_outcome(double collapse_time, const ComponentWeights& weights, std::uint64_t seed,
                            const TrialContext& context);

/// Flags implied by a collapse at `t` onto `chosen`.
unsigned collapse_flags(double t, Component chosen, double p_capture, double current, double peak_current,
                        const TrialContext& context);

/// Runs n_trials with seeds base_seed + i. Results are ordered by trial index and
/// independent of the thread count. `moments` is used only by penrose_spread.
std::vector<TrialRecord> run_trials(const ComponentWeights& weights, const EnergyMoments& moments,
                                    const TrialContext& context, std::uint64_t base_seed,
                                    std::size_t n_trials, unsigned threads = 1);

}  // namespace capsim
