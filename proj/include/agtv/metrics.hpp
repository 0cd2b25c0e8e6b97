// Evaluation metrics: normalized l2 reconstruction error, row intensity
// profiles, and the radially averaged power spectrum.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "agtv/fft.hpp"
#include "agtv/image.hpp"

namespace agtv {

struct MetricReport {
    double rel_l2_error = -1.0;  // < 0 when no ground truth was available
    int profile_row = 0;
    Vec profile;
    Vec raps;
};

// ||x - x_true|| / ||x_true||; dimensionless and comparable across sizes.
inline double rel_l2_error(const Image& x, const Image& x_true) {
    if (x.n != x_true.n) throw std::invalid_argument("rel_l2_error: size mismatch");
    const double den = norm2(x_true.data);
    if (den == 0.0) throw std::invalid_argument("rel_l2_error: zero ground truth");
    double num = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double d = x.data[i] - x_true.data[i];
        num += d * d;
    }
    return std::sqrt(num) / den;
}

inline Vec intensity_profile(const Image& x, int row) {
    if (row < 0 || row >= x.n) throw std::invalid_argument("intensity_profile: row out of range");
    return Vec(x.data.begin() + static_cast<std::size_t>(row) * x.n,
               x.data.begin() + static_cast<std::size_t>(row + 1) * x.n);
}

// Radially averaged power spectrum: 2-D DFT power averaged over annuli of
// rounded integer frequency radius. Radii beyond n/2-1 (the spectrum
// corners) are folded into the last bin so the binned power accounts for the
// whole spectrum.
inline Vec raps(const Image& x) {
    if (x.n % 2 != 0) throw std::invalid_argument("raps: n must be even");
    const int n = x.n;

    // Row-column DFT.
    std::vector<Cplx> freq(static_cast<std::size_t>(n) * n);
    std::vector<Cplx> line(n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) line[c] = Cplx(x.at(r, c), 0.0);
        fft(line, false);
        for (int c = 0; c < n; ++c) freq[static_cast<std::size_t>(r) * n + c] = line[c];
    }
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) line[r] = freq[static_cast<std::size_t>(r) * n + c];
        fft(line, false);
        for (int r = 0; r < n; ++r) freq[static_cast<std::size_t>(r) * n + c] = line[r];
    }

    const int bins = n / 2;
    Vec power(bins, 0.0);
    std::vector<long> count(bins, 0);
    for (int r = 0; r < n; ++r) {
        const double fv = r <= n / 2 ? r : r - n;  // signed frequency coordinate
        for (int c = 0; c < n; ++c) {
            const double fu = c <= n / 2 ? c : c - n;
            int bin = static_cast<int>(std::llround(std::sqrt(fu * fu + fv * fv)));
            if (bin >= bins) bin = bins - 1;
            power[bin] += std::norm(freq[static_cast<std::size_t>(r) * n + c]);
            count[bin] += 1;
        }
    }
    for (int b = 0; b < bins; ++b) power[b] /= static_cast<double>(count[b]);
    return power;
}

// Per-annulus sample counts matching raps(); exposed for spectral-power
// bookkeeping.
inline std::vector<long> raps_bin_counts(int n) {
    if (n % 2 != 0) throw std::invalid_argument("raps_bin_counts: n must be even");
    const int bins = n / 2;
    std::vector<long> count(bins, 0);
    for (int r = 0; r < n; ++r) {
        const double fv = r <= n / 2 ? r : r - n;
        for (int c = 0; c < n; ++c) {
            const double fu = c <= n / 2 ? c : c - n;
            int bin = static_cast<int>(std::llround(std::sqrt(fu * fu + fv * fv)));
            if (bin >= bins) bin = bins - 1;
            count[bin] += 1;
        }
    }
    return count;
}

}  // namespace agtv
