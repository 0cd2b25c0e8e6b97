// Minimal complex DFT: iterative radix-2 for power-of-two lengths, direct
// evaluation otherwise. Lengths in this project are small (FBP pads to a
// power of two; the spectrum metric runs on n <= a few hundred), so the
// direct fallback is never a bottleneck.
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace agtv {

using Cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

namespace detail {

inline void fft_radix2(std::vector<Cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const Cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Cplx u = a[i + k];
                const Cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (Cplx& v : a) v /= static_cast<double>(n);
    }
}

inline void dft_direct(std::vector<Cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    std::vector<Cplx> out(n, Cplx(0.0, 0.0));
    const double sgn = inverse ? 2.0 : -2.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = sgn * M_PI * static_cast<double>(k * t % n) / static_cast<double>(n);
            out[k] += a[t] * Cplx(std::cos(ang), std::sin(ang));
        }
    }
    if (inverse)
        for (Cplx& v : out) v /= static_cast<double>(n);
    a = std::move(out);
}

}  // namespace detail

// In-place DFT with the e^{-2 pi i k t / n} sign convention; inverse applies 1/n.
inline void fft(std::vector<Cplx>& a, bool inverse = false) {
    if (a.empty()) throw std::invalid_argument("fft: empty input");
    if (is_pow2(a.size()))
        detail::fft_radix2(a, inverse);
    else
        detail::dft_direct(a, inverse);
}

}  // namespace agtv
