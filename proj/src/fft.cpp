#include "tnsketch/fft.hpp"

#include <cmath>
#include <numbers>

#include "tnsketch/errors.hpp"

namespace tnsketch {

bool is_pow2(std::int64_t n) { return n >= 1 && (n & (n - 1)) == 0; }

std::int64_t next_pow2(std::int64_t n) {
  std::int64_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

void transform(std::vector<Complex>& x, bool inverse) {
  const std::size_t n = x.size();
  if (!is_pow2(static_cast<std::int64_t>(n))) {
    throw ValidationError("transform length must be a power of two");
  }
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const Complex wlen = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      Complex w{1.0, 0.0};
      for (std::size_t k = 0; k < len / 2; ++k) {
        Complex u = x[i + k];
        Complex v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : x) v *= scale;
  }
}

}  // namespace

void dft_inplace(std::vector<Complex>& x) { transform(x, false); }
void idft_inplace(std::vector<Complex>& x) { transform(x, true); }

std::vector<Complex> dft(std::vector<Complex> x) {
  dft_inplace(x);
  return x;
}

std::vector<Complex> dft(std::span<const double> x) {
  std::vector<Complex> c(x.begin(), x.end());
  dft_inplace(c);
  return c;
}

std::vector<Complex> idft(std::vector<Complex> x) {
  idft_inplace(x);
  return x;
}

std::vector<double> real_part(const std::vector<Complex>& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i].real();
  return out;
}

std::vector<double> circ_conv(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("circular convolution needs equal lengths");
  auto fx = dft(x);
  auto fy = dft(y);
  for (std::size_t i = 0; i < fx.size(); ++i) fx[i] *= fy[i];
  idft_inplace(fx);
  return real_part(fx);
}

std::vector<double> circ_xcorr(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("circular cross-correlation needs equal lengths");
  auto fx = dft(x);
  auto fy = dft(y);
  for (std::size_t i = 0; i < fx.size(); ++i) fx[i] = std::conj(fx[i]) * fy[i];
  idft_inplace(fx);
  return real_part(fx);
}

}  // namespace tnsketch
