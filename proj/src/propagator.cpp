#include "capsim/propagator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "capsim/errors.hpp"

namespace capsim {

double detector_window(const DetectorSpec& detector, double x) {
    const double d = x - detector.center;
    if (std::abs(d) >= detector.half_width) return 0.0;
    const double c = std::cos(std::numbers::pi * d / (2.0 * detector.half_width));
    return c * c;
}

void validate_detector(const DetectorSpec& detector, const Grid1D& grid) {
    if (!(detector.half_width >= 4.0 * grid.spacing())) {
        throw ValidationError("detector half_width is below 4 grid spacings");
    }
    if (!(detector.strength >= 0.0) || !std::isfinite(detector.strength)) {
        throw ValidationError("detector strength must be finite and non-negative");
    }
    const double margin = 0.1 * grid.length();
    const double lo = grid.origin() + margin;
    const double hi = grid.origin() + grid.length() - margin;
    if (detector.left() < lo || detector.right() > hi) {
        throw ValidationError("detector support must stay 10% of the domain length away from the boundaries");
    }
}

double ComponentWeights::peak_current() const {
    if (current.empty()) return 0.0;
    return *std::max_element(current.begin(), current.end());
}

double interpolate(std::span<const double> times, std::span<const double> values, double t) {
    if (times.empty()) return 0.0;
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto hi = static_cast<std::size_t>(it - times.begin());
    const auto lo = hi - 1;
    const double span = times[hi] - times[lo];
    const double f = span > 0.0 ? (t - times[lo]) / span : 0.0;
    return values[lo] + f * (values[hi] - values[lo]);
}

double boundary_mass(const WaveFunction& psi) {
    const auto amps = psi.amplitudes();
    const std::size_t strip = std::max<std::size_t>(1, amps.size() / 64);
    double sum = 0.0;
    for (std::size_t i = 0; i < strip; ++i) {
        sum += std::norm(amps[i]) + std::norm(amps[amps.size() - 1 - i]);
    }
    return sum * psi.grid().spacing();
}

double max_kinetic_energy(const Grid1D& grid, double mass) {
    const double k = grid.nyquist();
    return k * k / (2.0 * mass);
}

namespace {

void check_accuracy_guard(const Grid1D& grid, double dt, double mass) {
    if (!(dt > 0.0)) throw ValidationError("time step must be positive");
    const double product = dt * max_kinetic_energy(grid, mass);
    if (!(product < 0.5)) {
        std::ostringstream msg;
        msg << "accuracy guard: dt * max kinetic energy = " << product << " (must be < 0.5)";
        throw NumericalGuardError(msg.str());
    }
}

}  // namespace

SplitStepPropagator::SplitStepPropagator(const Grid1D& grid, const DetectorSpec& detector, double dt,
                                         double mass)
    : grid_(grid), detector_(detector), dt_(dt), fft_(grid.n_points()) {
    check_accuracy_guard(grid, dt, mass);
    const std::size_t n = grid.n_points();
    kinetic_phase_.resize(n);
    absorber_half_.resize(n);
    window_.resize(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double k = grid.wavenumber(j);
        kinetic_phase_[j] = std::polar(inv_n, -k * k * dt / (2.0 * mass));
    }
    for (std::size_t i = 0; i < n; ++i) {
        window_[i] = detector_window(detector, grid.x(i));
        absorber_half_[i] = std::exp(-detector.strength * window_[i] * dt / 2.0);
    }
}

void SplitStepPropagator::load(std::span<const Complex> amplitudes) {
    if (amplitudes.size() != fft_.size()) throw ValidationError("propagator: size mismatch");
    std::copy(amplitudes.begin(), amplitudes.end(), fft_.data().begin());
}

void SplitStepPropagator::step() {
    auto psi = fft_.data();
    const std::size_t n = psi.size();
    for (std::size_t i = 0; i < n; ++i) psi[i] *= absorber_half_[i];
    fft_.forward();
    for (std::size_t j = 0; j < n; ++j) {
        // Spelled out: std::complex operator* goes through the NaN-safe __muldc3 path.
        const double re = psi[j].real();
        const double im = psi[j].imag();
        const double kr = kinetic_phase_[j].real();
        const double ki = kinetic_phase_[j].imag();
        psi[j] = {re * kr - im * ki, re * ki + im * kr};
    }
    fft_.backward();
    for (std::size_t i = 0; i < n; ++i) psi[i] *= absorber_half_[i];
}

double SplitStepPropagator::squared_norm() const {
    double sum = 0.0;
    for (const auto& a : fft_.data()) sum += std::norm(a);
    return sum * grid_.spacing();
}

double SplitStepPropagator::capture_current() const {
    if (detector_.strength == 0.0) return 0.0;
    const auto psi = fft_.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) sum += window_[i] * std::norm(psi[i]);
    return 2.0 * detector_.strength * sum * grid_.spacing();
}

WaveFunction evolve_step(const WaveFunction& psi, const DetectorSpec& detector, double dt, double mass) {
    SplitStepPropagator prop(psi.grid(), detector, dt, mass);
    prop.load(psi.amplitudes());
    prop.step();
    const auto out = prop.state();
    return WaveFunction(psi.grid(), std::vector<Complex>(out.begin(), out.end()), psi.time() + dt);
}

double capture_current(const WaveFunction& psi, const DetectorSpec& detector) {
    if (detector.strength == 0.0) return 0.0;
    const auto amps = psi.amplitudes();
    double sum = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double w = detector_window(detector, psi.grid().x(i));
        if (w != 0.0) sum += w * std::norm(amps[i]);
    }
    return 2.0 * detector.strength * sum * psi.grid().spacing();
}

EvolutionResult run_evolution(const WaveFunction& initial, const DetectorSpec& detector, double t_final,
                              double dt, const EvolutionOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const auto& grid = initial.grid();
    if (options.sample_every == 0) throw ValidationError("sample_every must be positive");
    const double initial_norm = initial.squared_norm();
    if (std::abs(initial_norm - 1.0) > kNormTolerance) {
        std::ostringstream msg;
        msg << "initial state must be normalized (squared norm " << initial_norm << ")";
        throw ValidationError(msg.str());
    }
    const double duration = t_final - initial.time();
    if (!(duration > 0.0)) throw ValidationError("t_final must lie after the initial time");

    SplitStepPropagator prop(grid, detector, dt, options.mass);
    prop.load(initial.amplitudes());

    const auto n_steps = static_cast<std::size_t>(std::llround(std::ceil(duration / dt - 1e-9)));
    EvolutionResult result{{}, WaveFunction::zero(grid), {}, dt, 0.0};
    auto& w = result.weights;
    const std::size_t expected = n_steps / options.sample_every + 2;
    w.times.reserve(expected);
    w.p_no_capture.reserve(expected);
    w.p_capture.reserve(expected);
    w.current.reserve(expected);

    std::size_t sample_index = 0;
    auto record = [&](std::size_t step) {
        const double t = initial.time() + static_cast<double>(step) * dt;
        const double p0 = prop.squared_norm();
        w.times.push_back(t);
        w.p_no_capture.push_back(p0);
        // Capture weight is the absorbed norm, so it starts at exactly zero.
        // With the detector off there is nothing to absorb; norm drift is roundoff.
        w.p_capture.push_back(detector.strength > 0.0 ? initial_norm - p0 : 0.0);
        w.current.push_back(prop.capture_current());

        const auto state = prop.state();
        double edge = 0.0;
        const std::size_t strip = std::max<std::size_t>(1, state.size() / 64);
        for (std::size_t i = 0; i < strip; ++i) {
            edge += std::norm(state[i]) + std::norm(state[state.size() - 1 - i]);
        }
        edge *= grid.spacing();
        if (edge > kWrapTolerance) {
            std::ostringstream msg;
            msg << "boundary wrap-around guard: mass " << edge << " in boundary strips at t = " << t;
            throw NumericalGuardError(msg.str());
        }
        if (options.snapshot_stride > 0 && sample_index % options.snapshot_stride == 0) {
            Snapshot snap{t, std::vector<double>(state.size())};
            for (std::size_t i = 0; i < state.size(); ++i) snap.density[i] = std::norm(state[i]);
            result.snapshots.push_back(std::move(snap));
        }
        ++sample_index;
    };

    record(0);
    for (std::size_t step = 1; step <= n_steps; ++step) {
        prop.step();
        if (step % options.sample_every == 0 || step == n_steps) record(step);
    }

    const auto state = prop.state();
    result.final_state = WaveFunction(grid, std::vector<Complex>(state.begin(), state.end()),
                                      initial.time() + static_cast<double>(n_steps) * dt);
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace capsim
