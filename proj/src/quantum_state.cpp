#include "capsim/quantum_state.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "capsim/errors.hpp"
#include "capsim/fft.hpp"

namespace capsim {

Grid1D::Grid1D(std::size_t n_points, double length, double origin)
    : n_points_(n_points),
      length_(length),
      origin_(origin),
      spacing_(length / static_cast<double>(n_points)) {}

double Grid1D::wavenumber(std::size_t j) const {
    const double dk = 2.0 * std::numbers::pi / length_;
    const auto signed_j = (j < n_points_ / 2) ? static_cast<double>(j)
                                              : static_cast<double>(j) - static_cast<double>(n_points_);
    return dk * signed_j;
}

double Grid1D::nyquist() const { return std::numbers::pi / spacing_; }

Grid1D build_grid(std::size_t n_points, double length, double origin) {
    if (n_points < 2 || !std::has_single_bit(n_points)) {
        throw ValidationError("grid n_points " + std::to_string(n_points) + " is not a power of two");
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw ValidationError("grid length must be positive and finite");
    }
    if (!std::isfinite(origin)) throw ValidationError("grid origin must be finite");
    return Grid1D(n_points, length, origin);
}

WaveFunction::WaveFunction(Grid1D grid, std::vector<Complex> amplitudes, double time)
    : grid_(grid), amplitudes_(std::move(amplitudes)), time_(time) {
    if (amplitudes_.size() != grid_.n_points()) {
        throw ValidationError("wavefunction has " + std::to_string(amplitudes_.size()) +
                              " amplitudes for a grid of " + std::to_string(grid_.n_points()));
    }
}

WaveFunction WaveFunction::zero(const Grid1D& grid, double time) {
    return WaveFunction(grid, std::vector<Complex>(grid.n_points()), time);
}

double WaveFunction::squared_norm() const {
    double sum = 0.0;
    for (const auto& a : amplitudes_) sum += std::norm(a);
    return sum * grid_.spacing();
}

std::vector<double> WaveFunction::density() const {
    std::vector<double> rho(amplitudes_.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(amplitudes_[i]);
    return rho;
}

WaveFunction gaussian_packet(const Grid1D& grid, const PacketSpec& spec) {
    if (!(spec.width >= 4.0 * grid.spacing())) {
        std::ostringstream msg;
        msg << "packet width " << spec.width << " is below 4 grid spacings (" << 4.0 * grid.spacing()
            << ")";
        throw ValidationError(msg.str());
    }
    if (!(std::abs(spec.momentum) < grid.nyquist())) {
        std::ostringstream msg;
        msg << "packet momentum " << spec.momentum << " is aliased (Nyquist limit " << grid.nyquist()
            << ")";
        throw ValidationError(msg.str());
    }
    if (!(spec.amplitude_weight > 0.0 && spec.amplitude_weight <= 1.0)) {
        throw ValidationError("packet amplitude_weight must lie in (0, 1]");
    }

    std::vector<Complex> amps(grid.n_points());
    const double inv_four_var = 1.0 / (4.0 * spec.width * spec.width);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double x = grid.x(i);
        const double d = x - spec.center;
        amps[i] = std::exp(-d * d * inv_four_var) * std::polar(1.0, spec.momentum * x);
    }
    double norm = 0.0;
    for (const auto& a : amps) norm += std::norm(a);
    norm *= grid.spacing();
    const double scale = std::sqrt(spec.amplitude_weight / norm);
    for (auto& a : amps) a *= scale;
    return WaveFunction(grid, std::move(amps));
}

WaveFunction superpose(const WaveFunction& a, const WaveFunction& b) {
    if (!(a.grid() == b.grid())) throw ValidationError("superpose: grid mismatch");
    if (a.time() != b.time()) throw ValidationError("superpose: time mismatch");
    std::vector<Complex> sum(a.amplitudes().begin(), a.amplitudes().end());
    const auto rhs = b.amplitudes();
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += rhs[i];
    return WaveFunction(a.grid(), std::move(sum), a.time());
}

Complex inner_product(const WaveFunction& a, const WaveFunction& b) {
    if (!(a.grid() == b.grid())) throw ValidationError("inner_product: grid mismatch");
    Complex sum{0.0, 0.0};
    const auto lhs = a.amplitudes();
    const auto rhs = b.amplitudes();
    for (std::size_t i = 0; i < lhs.size(); ++i) sum += std::conj(lhs[i]) * rhs[i];
    return sum * a.grid().spacing();
}

EnergyMoments energy_moments(const WaveFunction& psi, double mass) {
    const auto& grid = psi.grid();
    FftWorkspace fft(grid.n_points());
    auto buf = fft.data();
    const auto amps = psi.amplitudes();
    std::copy(amps.begin(), amps.end(), buf.begin());
    fft.forward();

    // Parseval: the momentum density is |FFT|^2 up to a constant that the
    // normalization below divides out.
    double total = 0.0;
    double first = 0.0;
    for (std::size_t j = 0; j < buf.size(); ++j) {
        const double weight = std::norm(buf[j]);
        const double k = grid.wavenumber(j);
        total += weight;
        first += weight * k * k / (2.0 * mass);
    }
    if (!(total > 0.0)) throw ValidationError("energy_moments: zero-norm wavefunction");
    const double mean = first / total;

    double second = 0.0;
    for (std::size_t j = 0; j < buf.size(); ++j) {
        const double k = grid.wavenumber(j);
        const double e = k * k / (2.0 * mass) - mean;
        second += std::norm(buf[j]) * e * e;
    }
    return {mean, std::sqrt(second / total)};
}

double position_mean(const WaveFunction& psi) {
    double total = 0.0;
    double first = 0.0;
    const auto amps = psi.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double rho = std::norm(amps[i]);
        total += rho;
        first += rho * psi.grid().x(i);
    }
    if (!(total > 0.0)) throw ValidationError("position_mean: zero-norm wavefunction");
    return first / total;
}

double position_spread(const WaveFunction& psi) {
    const double mean = position_mean(psi);
    double total = 0.0;
    double second = 0.0;
    const auto amps = psi.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double rho = std::norm(amps[i]);
        const double d = psi.grid().x(i) - mean;
        total += rho;
        second += rho * d * d;
    }
    return std::sqrt(second / total);
}

}  // namespace capsim
