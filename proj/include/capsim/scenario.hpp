#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "capsim/errors.hpp"
#include "capsim/propagator.hpp"
#include "capsim/quantum_state.hpp"

namespace capsim {

enum class ScenarioKind { SinglePulse, TwoPulse };

std::string to_string(ScenarioKind kind);

/// A single incoming packet, or two equal-weight co-moving pulses (the output of
/// a half-silvered mirror) separated by `pulse_gap` along the direction of motion.
/// For two_pulse, `packet.center` is the leading pulse; the trailing one sits
/// pulse_gap further upstream.
struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::SinglePulse;
    PacketSpec packet;
    double pulse_gap = 0.0;
    DetectorSpec detector;
    double t_final = 0.0;
    double dt = 0.0;
    std::size_t sample_every = 1;

    /// pulse_gap / group velocity
    double arrival_gap(double mass = kDefaultMass) const;

    bool operator==(const ScenarioSpec&) const = default;
};

/// Every violated geometric constraint, addressed by field path. Empty when valid.
std::vector<FieldIssue> check_scenario(const ScenarioSpec& spec, const Grid1D& grid);

/// Throws ConfigError listing all issues.
void validate_scenario(const ScenarioSpec& spec, const Grid1D& grid);

/// single_pulse: one weight-1 packet; two_pulse: two weight-0.5 packets with zero relative phase.
WaveFunction build_initial_state(const ScenarioSpec& spec, const Grid1D& grid);

/// The single-pulse scenario used to calibrate the detector: the leading pulse
/// alone, run until it has fully transited.
ScenarioSpec calibration_probe(const ScenarioSpec& spec);

struct CalibrationResult {
    double strength = 0.0;
    double achieved_capture = 0.0;
    int iterations = 0;
    std::pair<double, double> bracket{0.0, 0.0};  // initial bracket, before bisection
};

/// Raised when the target capture is not reachable on the rising branch of
/// capture(strength). Carries the best capture seen.
class CalibrationError : public NumericalGuardError {
public:
    CalibrationError(const std::string& what, double best_strength, double best_capture)
        : NumericalGuardError(what), best_strength_(best_strength), best_capture_(best_capture) {}

    double best_strength() const { return best_strength_; }
    double best_capture() const { return best_capture_; }

private:
    double best_strength_;
    double best_capture_;
};

/// Final capture P1(t_final) of the probe run at the given strength.
double probe_capture(const ScenarioSpec& probe, const Grid1D& grid, double strength);

/// Geometric bracketing then bisection on the detector strength so that the
/// single-pulse capture reaches `target`. Converged when the bracket width is
/// at most tolerance * upper end. The returned strength is the upper bracket
/// end, whose capture is >= target.
CalibrationResult calibrate_strength(const ScenarioSpec& spec, const Grid1D& grid, double target,
                                     double tolerance, int max_iter);

}  // namespace capsim
