#pragma once

// Thin wrapper over FFTW. Plans are created once per size and shared; execution
// is thread-safe.

#include <complex>
#include <vector>

namespace tilelab::fft {

/// out[m] = sum_t in[t] e^{-2 pi i m t / n}
std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& in);

/// out[t] = sum_m in[m] e^{2 pi i m t / n}
std::vector<std::complex<double>> backward(const std::vector<std::complex<double>>& in);

}  // namespace tilelab::fft
