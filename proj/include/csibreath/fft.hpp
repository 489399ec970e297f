#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace csibreath {

// In-place iterative radix-2 FFT. `data.size()` must be a power of two.
void fft(std::vector<std::complex<double>>& data, bool inverse = false);

// Forward FFT of a real series zero-padded to `n` (power of two, >= x.size()).
std::vector<std::complex<double>> fft_real_padded(const std::vector<double>& x,
                                                  std::size_t n);

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

}  // namespace csibreath
