// Orthonormal separable 2-D Daubechies-4 wavelet transform with periodic
// boundary handling. `analyze` is the adjoint (and exact inverse) of
// `synthesize`, so the l1 prox applies in coefficient space without any
// splitting error.
//
// Coefficient layout: standard Mallat arrangement in a row-major n x n
// array. After one level the top-left (n/2)^2 block holds the approximation
// and the remaining quadrants hold the detail subbands; deeper levels
// recurse on the approximation block.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "agtv/image.hpp"

namespace agtv {

struct WaveletCoeffs {
    int n = 0;
    int levels = 0;
    Vec data;  // n*n, Mallat layout
};

// Largest depth that leaves a >= 4 pixel approximation band, the usual
// working default (4 levels at n = 64).
inline int wavelet_default_levels(int n) {
    int levels = 0;
    while (n % 2 == 0 && n / 2 >= 4) {
        n /= 2;
        ++levels;
    }
    return std::max(levels, 1);
}

namespace detail {

// Daubechies-4 low-pass taps; high-pass by the quadrature mirror rule
// g[m] = (-1)^m h[3-m].
inline const double* db4_taps() {
    static const double r3 = std::sqrt(3.0);
    static const double s = 4.0 * std::sqrt(2.0);
    static const double h[4] = {(1.0 + r3) / s, (3.0 + r3) / s, (3.0 - r3) / s, (1.0 - r3) / s};
    return h;
}

// One forward step on `len` strided samples: first half approximations,
// second half details.
inline void dwt_step(double* x, int len, int stride, double* tmp) {
    const double* h = db4_taps();
    const double g[4] = {h[3], -h[2], h[1], -h[0]};
    const int half = len / 2;
    for (int k = 0; k < half; ++k) {
        double a = 0.0, d = 0.0;
        for (int m = 0; m < 4; ++m) {
            const double v = x[((2 * k + m) % len) * stride];
            a += h[m] * v;
            d += g[m] * v;
        }
        tmp[k] = a;
        tmp[half + k] = d;
    }
    for (int i = 0; i < len; ++i) x[i * stride] = tmp[i];
}

// Transpose of dwt_step (also its inverse, the filter bank is orthonormal).
inline void idwt_step(double* x, int len, int stride, double* tmp) {
    const double* h = db4_taps();
    const double g[4] = {h[3], -h[2], h[1], -h[0]};
    const int half = len / 2;
    for (int i = 0; i < len; ++i) tmp[i] = 0.0;
    for (int k = 0; k < half; ++k) {
        const double a = x[k * stride];
        const double d = x[(half + k) * stride];
        for (int m = 0; m < 4; ++m) {
            tmp[(2 * k + m) % len] += h[m] * a + g[m] * d;
        }
    }
    for (int i = 0; i < len; ++i) x[i * stride] = tmp[i];
}

}  // namespace detail

inline void check_levels(int n, int levels) {
    if (levels < 1) throw std::invalid_argument("wavelet: levels must be >= 1");
    if (n % (1 << levels) != 0)
        throw std::invalid_argument(
            "wavelet: image side not divisible by 2^levels; reduce the decomposition depth");
}

inline WaveletCoeffs analyze(const Image& img, int levels) {
    check_levels(img.n, levels);
    WaveletCoeffs c{img.n, levels, img.data};
    const int n = img.n;
    std::vector<double> tmp(n);
    int size = n;
    for (int l = 0; l < levels; ++l) {
        for (int r = 0; r < size; ++r) detail::dwt_step(&c.data[static_cast<std::size_t>(r) * n], size, 1, tmp.data());
        for (int col = 0; col < size; ++col) detail::dwt_step(&c.data[col], size, n, tmp.data());
        size /= 2;
    }
    return c;
}

inline Image synthesize(const WaveletCoeffs& c) {
    check_levels(c.n, c.levels);
    if (c.data.size() != static_cast<std::size_t>(c.n) * c.n)
        throw std::invalid_argument("synthesize: coefficient length != n*n");
    Image img(c.n, c.data);
    const int n = c.n;
    std::vector<double> tmp(n);
    for (int l = c.levels - 1; l >= 0; --l) {
        const int size = n >> l;
        for (int col = 0; col < size; ++col) detail::idwt_step(&img.data[col], size, n, tmp.data());
        for (int r = 0; r < size; ++r)
            detail::idwt_step(&img.data[static_cast<std::size_t>(r) * n], size, 1, tmp.data());
    }
    return img;
}

// Vector-space forms used inside the solvers (image side n implied).
inline Vec analyze_vec(const Vec& x, int n, int levels) {
    return analyze(Image(n, x), levels).data;
}

inline Vec synthesize_vec(const Vec& coeffs, int n, int levels) {
    WaveletCoeffs c{n, levels, coeffs};
    return synthesize(c).data;
}

}  // namespace agtv
