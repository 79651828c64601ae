#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace capsim {

/// Owns an aligned in-place buffer and the forward/backward FFTW plans for it.
/// Neither direction is normalized; a forward/backward round trip scales by size().
/// Instances are not shareable across threads, but separate instances may be
/// used concurrently (plan creation is serialized internally).
class FftWorkspace {
public:
    explicit FftWorkspace(std::size_t n);
    ~FftWorkspace();

    FftWorkspace(const FftWorkspace&) = delete;
    FftWorkspace& operator=(const FftWorkspace&) = delete;
    FftWorkspace(FftWorkspace&& other) noexcept;
    FftWorkspace& operator=(FftWorkspace&& other) noexcept;

    std::size_t size() const { return n_; }
    std::span<std::complex<double>> data() { return {buffer_, n_}; }
    std::span<const std::complex<double>> data() const { return {buffer_, n_}; }

    void forward();
    void backward();

private:
    void release() noexcept;

    std::size_t n_ = 0;
    std::complex<double>* buffer_ = nullptr;
    void* forward_plan_ = nullptr;
    void* backward_plan_ = nullptr;
};

}  // namespace capsim
