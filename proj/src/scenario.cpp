#include "capsim/scenario.hpp"

#include <cmath>
#include <sstream>

namespace capsim {
namespace {

// Gaussian tails beyond this many widths carry < 1e-13 of the density.
constexpr double kClearanceWidths = 8.0;

std::string describe(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

double direction(const PacketSpec& packet) { return packet.momentum >= 0.0 ? 1.0 : -1.0; }

double trailing_center(const ScenarioSpec& spec) {
    return spec.packet.center - direction(spec.packet) * spec.pulse_gap;
}

}  // namespace

std::string to_string(ScenarioKind kind) {
    return kind == ScenarioKind::SinglePulse ? "single_pulse" : "two_pulse";
}

double ScenarioSpec::arrival_gap(double mass) const {
    return pulse_gap / (std::abs(packet.momentum) / mass);
}

std::vector<FieldIssue> check_scenario(const ScenarioSpec& spec, const Grid1D& grid) {
    std::vector<FieldIssue> issues;
    const auto& p = spec.packet;
    const double dx = grid.spacing();

    if (!(p.width >= 4.0 * dx)) {
        issues.push_back({"packet.width", "width " + describe(p.width) +
                                              " is below 4 grid spacings (" + describe(4 * dx) + ")"});
    }
    if (!(std::abs(p.momentum) < grid.nyquist())) {
        issues.push_back({"packet.momentum", "momentum exceeds the Nyquist limit " + describe(grid.nyquist())});
    }
    if (p.momentum == 0.0) {
        issues.push_back({"packet.momentum", "momentum must be nonzero and directed toward the detector"});
    }
    if (!(spec.dt > 0.0)) issues.push_back({"scenario.dt", "must be positive"});
    if (!(spec.t_final > 0.0)) issues.push_back({"scenario.t_final", "must be positive"});
    if (spec.sample_every == 0) issues.push_back({"scenario.sample_every", "must be positive"});

    const auto& d = spec.detector;
    if (!(d.half_width >= 4.0 * dx)) {
        issues.push_back({"detector.half_width", "must be at least 4 grid spacings"});
    }
    if (!(d.strength >= 0.0) || !std::isfinite(d.strength)) {
        issues.push_back({"detector.strength", "must be finite and non-negative"});
    }
    const double margin = 0.1 * grid.length();
    if (d.left() < grid.origin() + margin || d.right() > grid.origin() + grid.length() - margin) {
        issues.push_back({"detector.center",
                          "detector support must stay 10% of the domain length from the boundaries"});
    }

    // Every pulse must start upstream of the detector, clear of its support.
    const double dir = direction(p);
    auto check_upstream = [&](double center, const std::string& which) {
        const double front = center + dir * kClearanceWidths * p.width;
        const bool overlaps = dir > 0 ? front > d.left() : front < d.right();
        if (overlaps) {
            issues.push_back({"packet.center", which + " pulse overlaps the detector at t = 0 (needs " +
                                                   describe(kClearanceWidths) +
                                                   " widths of clearance upstream of the detector)"});
        }
        const double lo = grid.origin() + grid.length() / 64.0;
        const double hi = grid.origin() + grid.length() - grid.length() / 64.0;
        if (center - kClearanceWidths * p.width < lo || center + kClearanceWidths * p.width > hi) {
            issues.push_back({"packet.center", which + " pulse tails reach the domain boundary"});
        }
    };
    check_upstream(p.center, spec.kind == ScenarioKind::TwoPulse ? "leading" : "single");

    if (spec.kind == ScenarioKind::TwoPulse) {
        if (!(spec.pulse_gap >= kClearanceWidths * p.width)) {
            issues.push_back({"scenario.pulse_gap", "pulses overlap: gap must be at least " +
                                                        describe(kClearanceWidths) + " widths"});
        } else {
            check_upstream(trailing_center(spec), "trailing");
        }
    }
    return issues;
}

void validate_scenario(const ScenarioSpec& spec, const Grid1D& grid) {
    auto issues = check_scenario(spec, grid);
    if (!issues.empty()) throw ConfigError(std::move(issues));
}

WaveFunction build_initial_state(const ScenarioSpec& spec, const Grid1D& grid) {
    validate_scenario(spec, grid);
    PacketSpec lead = spec.packet;
    if (spec.kind == ScenarioKind::SinglePulse) {
        lead.amplitude_weight = 1.0;
        return gaussian_packet(grid, lead);
    }
    lead.amplitude_weight = 0.5;
    PacketSpec trail = lead;
    trail.center = trailing_center(spec);
    return superpose(gaussian_packet(grid, lead), gaussian_packet(grid, trail));
}

ScenarioSpec calibration_probe(const ScenarioSpec& spec) {
    ScenarioSpec probe = spec;
    probe.kind = ScenarioKind::SinglePulse;
    probe.pulse_gap = 0.0;
    if (spec.kind == ScenarioKind::TwoPulse) {
        // The leading pulse transits one arrival gap ahead of the trailing one.
        const double steps = std::floor((spec.t_final - spec.arrival_gap()) / spec.dt);
        probe.t_final = steps * spec.dt;
    }
    return probe;
}

double probe_capture(const ScenarioSpec& probe, const Grid1D& grid, double strength) {
    ScenarioSpec s = probe;
    s.detector.strength = strength;
    const auto initial = build_initial_state(s, grid);
    EvolutionOptions opts;
    opts.sample_every = s.sample_every;
    const auto result = run_evolution(initial, s.detector, s.t_final, s.dt, opts);
    return result.weights.p_capture.back();
}

CalibrationResult calibrate_strength(const ScenarioSpec& spec, const Grid1D& grid, double target,
                                     double tolerance, int max_iter) {
    if (target <= 0.0) return {};
    if (!(target < 1.0)) throw ValidationError("calibration target must lie in (0, 1)");
    if (!(tolerance > 0.0)) throw ValidationError("calibration tolerance must be positive");

    const ScenarioSpec probe = calibration_probe(spec);
    validate_scenario(probe, grid);

    int iterations = 0;
    auto capture_at = [&](double g) {
        ++iterations;
        return probe_capture(probe, grid, g);
    };

    // Transmission through the absorber is about exp(-2 * strength * half_width / v).
    const double speed = std::abs(probe.packet.momentum) / kDefaultMass;
    double guess = speed * std::log(1.0 / (1.0 - target)) / (2.0 * probe.detector.half_width);

    double lo = 0.0;
    double hi = guess;
    double hi_capture = capture_at(hi);
    double best_strength = hi;
    double best_capture = hi_capture;

    if (hi_capture >= target) {
        // Walk down until the lower end falls below target.
        double g = hi;
        while (true) {
            if (iterations >= max_iter) {
                throw CalibrationError("calibration: bracketing exhausted max_iter", hi, hi_capture);
            }
            g *= 0.5;
            const double c = capture_at(g);
            if (c < target) {
                lo = g;
                break;
            }
            hi = g;
            hi_capture = c;
        }
    } else {
        // Walk up; a drop in capture means the absorber has started reflecting.
        lo = hi;
        double lo_capture = hi_capture;
        while (true) {
            if (iterations >= max_iter) {
                throw CalibrationError("calibration: target " + describe(target) +
                                           " not reached within max_iter; best capture " +
                                           describe(best_capture),
                                       best_strength, best_capture);
            }
            const double g = lo * 2.0;
            const double c = capture_at(g);
            if (c > best_capture) {
                best_capture = c;
                best_strength = g;
            }
            if (c >= target) {
                hi = g;
                hi_capture = c;
                break;
            }
            if (c <= lo_capture) {
                throw CalibrationError("calibration: target " + describe(target) +
                                           " unreachable on the rising branch; best capture " +
                                           describe(best_capture),
                                       best_strength, best_capture);
            }
            lo = g;
            lo_capture = c;
        }
    }

    const std::pair<double, double> bracket{lo, hi};
    while (hi - lo > tolerance * hi) {
        if (iterations >= max_iter) break;
        const double mid = 0.5 * (lo + hi);
        const double c = capture_at(mid);
        if (c >= target) {
            hi = mid;
            hi_capture = c;
        } else {
            lo = mid;
        }
    }
    return {hi, hi_capture, iterations, bracket};
}

}  // namespace capsim
