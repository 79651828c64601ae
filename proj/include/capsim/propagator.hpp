#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "capsim/fft.hpp"
#include "capsim/quantum_state.hpp"

namespace capsim {

enum class WindowProfile { CosineSquared };

/// Purely absorbing detector region: -i * strength * w(x), with w a cos^2 bump
/// on [center - half_width, center + half_width] and zero outside.
struct DetectorSpec {
    double center = 0.0;
    double half_width = 1.0;
    double strength = 0.0;  // Gamma; 0 switches the detector off
    WindowProfile window = WindowProfile::CosineSquared;

    double left() const { return center - half_width; }
    double right() const { return center + half_width; }

    bool operator==(const DetectorSpec&) const = default;
};

/// w(x) in [0, 1]; integrates to half_width over the support.
double detector_window(const DetectorSpec& detector, double x);

/// Throws ValidationError when the detector is unresolved or too close to a boundary.
void validate_detector(const DetectorSpec& detector, const Grid1D& grid);

/// Sampled two-component bookkeeping: no-capture weight P0 = ||psi||^2,
/// capture weight P1 = 1 - P0, and capture current J = dP1/dt.
struct ComponentWeights {
    std::vector<double> times;
    std::vector<double> p_no_capture;
    std::vector<double> p_capture;
    std::vector<double> current;

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
    double peak_current() const;

    bool operator==(const ComponentWeights&) const = default;
};

/// Linear interpolation of a sampled series at time t (clamped to the record).
double interpolate(std::span<const double> times, std::span<const double> values, double t);

struct Snapshot {
    double time = 0.0;
    std::vector<double> density;
};

struct EvolutionResult {
    ComponentWeights weights;
    WaveFunction final_state;
    std::vector<Snapshot> snapshots;
    double step_size = 0.0;
    double wall_time = 0.0;
};

struct EvolutionOptions {
    std::size_t sample_every = 1;
    std::size_t snapshot_stride = 0;  // in samples; 0 disables snapshots
    double mass = kDefaultMass;
};

// Probability mass allowed in the boundary strips before the periodic
// wrap-around guard aborts a run.
inline constexpr double kWrapTolerance = 1e-8;

/// Mass sum |psi|^2 dx inside the outer n/64 points on each side of the grid.
double boundary_mass(const WaveFunction& psi);

/// Strang split-step propagator for H = p^2/2m - i * strength * w(x).
/// Owns its FFT workspace; one instance per evolution.
class SplitStepPropagator {
public:
    SplitStepPropagator(const Grid1D& grid, const DetectorSpec& detector, double dt,
                        double mass = kDefaultMass);

    const Grid1D& grid() const { return grid_; }
    double dt() const { return dt_; }

    /// Loads psi into the workspace.
    void load(std::span<const Complex> amplitudes);

    /// Advances the workspace state by one step.
    void step();

    std::span<const Complex> state() const { return fft_.data(); }
    double squared_norm() const;
    double capture_current() const;

private:
    Grid1D grid_;
    DetectorSpec detector_;
    double dt_;
    FftWorkspace fft_;
    std::vector<Complex> kinetic_phase_;  // exp(-i k^2 dt / 2m) / N
    std::vector<double> absorber_half_;   // exp(-strength * w * dt / 2)
    std::vector<double> window_;
};

/// Largest eigenvalue of the discrete kinetic operator, (pi/dx)^2 / 2m.
double max_kinetic_energy(const Grid1D& grid, double mass = kDefaultMass);

/// One Strang step. Throws NumericalGuardError if dt * max_kinetic_energy >= 0.5.
WaveFunction evolve_step(const WaveFunction& psi, const DetectorSpec& detector, double dt,
                         double mass = kDefaultMass);

/// 2 * strength * integral w(x) |psi|^2 dx
double capture_current(const WaveFunction& psi, const DetectorSpec& detector);

/// Evolves `initial` (normalized) to t_final, recording ComponentWeights every
/// sample_every steps plus the final step.
EvolutionResult run_evolution(const WaveFunction& initial, const DetectorSpec& detector,
                              double t_final, double dt, const EvolutionOptions& options = {});

}  // namespace capsim
