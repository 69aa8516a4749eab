#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace tnsketch {

using Complex = std::complex<double>;

bool is_pow2(std::int64_t n);
std::int64_t next_pow2(std::int64_t n);

// Radix-2 transforms; lengths must be powers of two. Forward uses the
// exp(-2*pi*i/n) kernel, so dft(e_1) is the all-ones vector; idft scales by
// 1/n so idft(dft(x)) == x.
void dft_inplace(std::vector<Complex>& x);
void idft_inplace(std::vector<Complex>& x);

std::vector<Complex> dft(std::vector<Complex> x);
std::vector<Complex> dft(std::span<const double> x);
std::vector<Complex> idft(std::vector<Complex> x);

std::vector<double> real_part(const std::vector<Complex>& x);

/// (x * y)_j = sum_i x_i y_{((j-i) mod n)+1}, via the FFT.
std::vector<double> circ_conv(std::span<const double> x, std::span<const double> y);

/// (x ⋆ y)_j = sum_i x_i y_{((j+i-2) mod n)+1} for real x, via the FFT.
std::vector<double> circ_xcorr(std::span<const double> x, std::span<const double> y);

}  // namespace tnsketch
