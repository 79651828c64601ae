#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace capsim {

using Complex = std::complex<double>;

// Natural units throughout: hbar = 1, and the particle mass defaults to 1.
inline constexpr double kDefaultMass = 1.0;

// Tolerance on norm invariants (spectral roundoff budget over ~1e5 steps).
inline constexpr double kNormTolerance = 1e-6;

/// Uniform periodic grid. Coordinates are origin + i * spacing for i in [0, n_points).
class Grid1D {
public:
    Grid1D(std::size_t n_points, double length, double origin);

    std::size_t n_points() const { return n_points_; }
    double length() const { return length_; }
    double origin() const { return origin_; }
    double spacing() const { return spacing_; }

    double x(std::size_t i) const { return origin_ + static_cast<double>(i) * spacing_; }

    /// Angular wavenumber of FFT bin j in standard FFT ordering.
    double wavenumber(std::size_t j) const;

    /// Largest resolvable wavenumber, pi / spacing.
    double nyquist() const;

    bool operator==(const Grid1D&) const = default;

private:
    std::size_t n_points_;
    double length_;
    double origin_;
    double spacing_;
};

/// Throws ValidationError for non-power-of-two n_points or non-positive length.
Grid1D build_grid(std::size_t n_points, double length, double origin);

/// Sampled complex amplitudes psi(x_i, t), units of length^(-1/2).
class WaveFunction {
public:
    WaveFunction(Grid1D grid, std::vector<Complex> amplitudes, double time = 0.0);

    /// Identically zero state on the grid.
    static WaveFunction zero(const Grid1D& grid, double time = 0.0);

    const Grid1D& grid() const { return grid_; }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    double time() const { return time_; }

    /// sum |psi_i|^2 * spacing
    double squared_norm() const;

    /// Probability density |psi_i|^2 at each grid point.
    std::vector<double> density() const;

private:
    Grid1D grid_;
    std::vector<Complex> amplitudes_;
    double time_;
};

struct PacketSpec {
    double center = 0.0;
    double width = 1.0;     // position-space standard deviation of |psi|^2
    double momentum = 0.0;  // mean momentum p0
    double amplitude_weight = 1.0;

    bool operator==(const PacketSpec&) const = default;
};

struct EnergyMoments {
    double mean_energy = 0.0;
    double energy_spread = 0.0;  // sqrt(<H^2> - <H>^2)
};

/// Minimum-uncertainty Gaussian with squared norm equal to spec.amplitude_weight.
WaveFunction gaussian_packet(const Grid1D& grid, const PacketSpec& spec);

/// Pointwise sum, no renormalization. Grids and times must match.
WaveFunction superpose(const WaveFunction& a, const WaveFunction& b);

/// <a|b> = sum conj(a_i) b_i * spacing
Complex inner_product(const WaveFunction& a, const WaveFunction& b);

/// Moments of the free Hamiltonian p^2 / 2m, evaluated on the momentum-space density
/// of a normalized copy of psi.
EnergyMoments energy_moments(const WaveFunction& psi, double mass = kDefaultMass);

/// Mean position of |psi|^2 (normalized copy).
double position_mean(const WaveFunction& psi);

/// Position standard deviation of |psi|^2 (normalized copy).
double position_spread(const WaveFunction& psi);

}  // namespace capsim
