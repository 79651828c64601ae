#include "capsim/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <new>
#include <utility>

namespace capsim {
namespace {

// FFTW's planner is not re-entrant; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

FftWorkspace::FftWorkspace(std::size_t n) : n_(n) {
    buffer_ = static_cast<std::complex<double>*>(fftw_malloc(sizeof(std::complex<double>) * n));
    if (buffer_ == nullptr) throw std::bad_alloc();
    for (std::size_t i = 0; i < n; ++i) buffer_[i] = {0.0, 0.0};

    std::lock_guard lock(planner_mutex());
    const int size = static_cast<int>(n);
    forward_plan_ = fftw_plan_dft_1d(size, as_fftw(buffer_), as_fftw(buffer_), FFTW_FORWARD,
                                     FFTW_ESTIMATE);
    backward_plan_ = fftw_plan_dft_1d(size, as_fftw(buffer_), as_fftw(buffer_), FFTW_BACKWARD,
                                      FFTW_ESTIMATE);
}

FftWorkspace::~FftWorkspace() { release(); }

FftWorkspace::FftWorkspace(FftWorkspace&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      buffer_(std::exchange(other.buffer_, nullptr)),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      backward_plan_(std::exchange(other.backward_plan_, nullptr)) {}

FftWorkspace& FftWorkspace::operator=(FftWorkspace&& other) noexcept {
    if (this != &other) {
        release();
        n_ = std::exchange(other.n_, 0);
        buffer_ = std::exchange(other.buffer_, nullptr);
        forward_plan_ = std::exchange(other.forward_plan_, nullptr);
        backward_plan_ = std::exchange(other.backward_plan_, nullptr);
    }
    return *this;
}

void FftWorkspace::forward() { fftw_execute(static_cast<fftw_plan>(forward_plan_)); }

void FftWorkspace::backward() { fftw_execute(static_cast<fftw_plan>(backward_plan_)); }

void FftWorkspace::release() noexcept {
    if (forward_plan_ != nullptr || backward_plan_ != nullptr) {
        std::lock_guard lock(planner_mutex());
        if (forward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
        if (backward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
    }
    forward_plan_ = nullptr;
    backward_plan_ = nullptr;
    if (buffer_ != nullptr) fftw_free(buffer_);
    buffer_ = nullptr;
}

}  // namespace capsim
