// Filtered back projection with a hard-cropped Ram-Lak (ramp) filter and
// linear detector interpolation. Produces the initial estimate the graph
// and solver modules start from.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "agtv/fft.hpp"
#include "agtv/image.hpp"
#include "agtv/projector.hpp"

namespace agtv {

enum class FbpFilter { kRamLakCropped };
enum class FbpInterpolation { kLinear };

struct FbpConfig {
    FbpFilter filter = FbpFilter::kRamLakCropped;
    double crop_fraction = 0.8;  // fraction of Nyquist kept, in (0,1]
    FbpInterpolation interpolation = FbpInterpolation::kLinear;
};

inline Image fbp_reconstruct(const Sinogram& sino, const std::vector<double>& angles_deg, int n,
                             const FbpConfig& cfg = {}) {
    if (sino.q != static_cast<int>(angles_deg.size()))
        throw std::invalid_argument("fbp_reconstruct: angle count mismatch");
    if (sino.p < 1 || sino.q < 1) throw std::invalid_argument("fbp_reconstruct: empty sinogram");
    if (n < 1) throw std::invalid_argument("fbp_reconstruct: n must be >= 1");
    if (!(cfg.crop_fraction > 0.0 && cfg.crop_fraction <= 1.0))
        throw std::invalid_argument("fbp_reconstruct: crop_fraction must be in (0,1]");

    const int p = sino.p;
    const int q = sino.q;
    // Zero-pad to >= 2p so the circular convolution does not wrap into the
    // detector window.
    const std::size_t m = next_pow2(std::max<std::size_t>(2 * static_cast<std::size_t>(p), 8));

    // Ramp |f| in cycles per detector sample, hard-cropped above
    // crop_fraction * Nyquist (Nyquist = 0.5).
    std::vector<double> ramp(m);
    const double cutoff = 0.5 * cfg.crop_fraction;
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t kf = std::min(k, m - k);
        const double f = static_cast<double>(kf) / static_cast<double>(m);
        ramp[k] = (f <= cutoff) ? f : 0.0;
    }

    // Filter each view. Detector spacing is one pixel side, so the 1/dt
    // factor of the continuous formula is unity.
    std::vector<double> filtered(static_cast<std::size_t>(p) * q);
    std::vector<Cplx> buf;
    for (int a = 0; a < q; ++a) {
        buf.assign(m, Cplx(0.0, 0.0));
        for (int r = 0; r < p; ++r) buf[r] = Cplx(sino.at(r, a), 0.0);
        fft(buf, false);
        for (std::size_t k = 0; k < m; ++k) buf[k] *= ramp[k];
        fft(buf, true);
        for (int r = 0; r < p; ++r) filtered[static_cast<std::size_t>(a) * p + r] = buf[r].real();
    }

    // Back projection with linear interpolation on the detector axis.
    Image img(n);
    const double t0 = detector_coord(p, 0);
    const double dtheta = M_PI / q;
    for (int a = 0; a < q; ++a) {
        const double rad = angles_deg[a] * M_PI / 180.0;
        const double c = std::cos(rad), s = std::sin(rad);
        const double* fa = &filtered[static_cast<std::size_t>(a) * p];
        for (int row = 0; row < n; ++row) {
            const double y = 0.5 * n - (row + 0.5);
            for (int col = 0; col < n; ++col) {
                const double x = (col + 0.5) - 0.5 * n;
                const double t = x * c + y * s;
                const double u = t - t0;
                const int i0 = static_cast<int>(std::floor(u));
                const double w = u - i0;
                double v = 0.0;
                if (i0 >= 0 && i0 < p) v += (1.0 - w) * fa[i0];
                if (i0 + 1 >= 0 && i0 + 1 < p) v += w * fa[i0 + 1];
                img.at(row, col) += dtheta * v;
            }
        }
    }
    for (double& v : img.data)
        if (!std::isfinite(v)) throw std::runtime_error("fbp_reconstruct: non-finite output");
    return img;
}

}  // namespace agtv
