// Parallel-beam projection: sparse system matrix built from exact ray-pixel
// intersection lengths, forward projection, and calibrated noise injection.
//
// Geometry. The n x n image is treated as a grid of unit pixels spanning
// [-n/2, n/2]^2, i.e. lengths are measured in units of the pixel side. A ray
// for (angle theta, detector coordinate t) is the line
//     { (x, y) : x cos(theta) + y sin(theta) = t },
// so at theta = 0 rays run vertically and t is the x coordinate. The p rays
// per angle sit at t_k = (k + 0.5 - p/2), one detector bin per pixel column,
// centered on the image. Rows of A (and the sinogram vector b) are ordered
// angle-major: row = angle_index * p + ray_index.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "agtv/image.hpp"
#include "agtv/sparse.hpp"

namespace agtv {

struct Sinogram {
    int p = 0;  // rays per angle
    int q = 0;  // angles
    Vec data;   // p*q, angle-major: data[a*p + r]

    Sinogram() = default;
    Sinogram(int rays, int angles) : p(rays), q(angles), data(static_cast<std::size_t>(rays) * angles, 0.0) {}
    double& at(int ray, int angle) { return data[static_cast<std::size_t>(angle) * p + ray]; }
    double at(int ray, int angle) const { return data[static_cast<std::size_t>(angle) * p + ray]; }
};

struct ProjectionMatrix {
    CsrMatrix A;                  // (p*q) x (n*n)
    int n = 0;                    // image side
    int p = 0;                    // rays per angle
    std::vector<double> angles_deg;

    int q() const { return static_cast<int>(angles_deg.size()); }
};

inline double detector_coord(int p, int ray) { return ray + 0.5 - 0.5 * p; }

namespace detail {

struct RayDir {
    double c, s;  // cos(theta), sin(theta); tiny components snapped to 0
};

inline RayDir ray_dir(double angle_deg) {
    const double rad = angle_deg * M_PI / 180.0;
    double c = std::cos(rad), s = std::sin(rad);
    if (std::fabs(c) < 1e-14) c = 0.0;
    if (std::fabs(s) < 1e-14) s = 0.0;
    const double nrm = std::hypot(c, s);
    return {c / nrm, s / nrm};
}

// Walks the ray through the unit-pixel grid (Amanatides & Woo) and emits one
// (row, col, length) triple per crossed pixel.
template <typename Emit>
inline void trace_ray(int n, const RayDir& dir, double t, Emit&& emit) {
    const double half = 0.5 * n;
    // Ray point P(s) = t*(c,s) + s*(-s,c).
    const double x0 = t * dir.c, y0 = t * dir.s;
    const double dx = -dir.s, dy = dir.c;

    double s_lo = -std::numeric_limits<double>::infinity();
    double s_hi = std::numeric_limits<double>::infinity();
    if (dx != 0.0) {
        const double a = (-half - x0) / dx, b = (half - x0) / dx;
        s_lo = std::max(s_lo, std::min(a, b));
        s_hi = std::min(s_hi, std::max(a, b));
    } else if (x0 <= -half || x0 >= half) {
        return;
    }
    if (dy != 0.0) {
        const double a = (-half - y0) / dy, b = (half - y0) / dy;
        s_lo = std::max(s_lo, std::min(a, b));
        s_hi = std::min(s_hi, std::max(a, b));
    } else if (y0 <= -half || y0 >= half) {
        return;
    }
    if (!(s_hi - s_lo > 1e-12)) return;

    // Starting cell, nudged inward so boundary hits land in a valid pixel.
    const double s_start = s_lo + 1e-12 * (s_hi - s_lo);
    const double px = x0 + s_start * dx, py = y0 + s_start * dy;
    int col = static_cast<int>(std::floor(px + half));
    int row = static_cast<int>(std::floor(half - py));
    col = std::max(0, std::min(n - 1, col));
    row = std::max(0, std::min(n - 1, row));

    const double inf = std::numeric_limits<double>::infinity();
    int step_col = 0, step_row = 0;
    double t_max_x = inf, t_max_y = inf, t_dx = inf, t_dy = inf;
    if (dx > 0.0) {
        step_col = 1;
        t_max_x = ((col + 1) - half - x0) / dx;
        t_dx = 1.0 / dx;
    } else if (dx < 0.0) {
        step_col = -1;
        t_max_x = (col - half - x0) / dx;
        t_dx = -1.0 / dx;
    }
    // Row index grows as y decreases: pixel row spans y in [half-row-1, half-row].
    if (dy > 0.0) {
        step_row = -1;
        t_max_y = ((half - row) - y0) / dy;
        t_dy = 1.0 / dy;
    } else if (dy < 0.0) {
        step_row = 1;
        t_max_y = ((half - row - 1) - y0) / dy;
        t_dy = -1.0 / dy;
    }

    double s_cur = s_lo;
    while (true) {
        const double s_next = std::min(std::min(t_max_x, t_max_y), s_hi);
        const double len = s_next - s_cur;
        if (len > 0.0) emit(row, col, len);
        if (s_next >= s_hi) break;
        if (t_max_x <= t_max_y) {
            col += step_col;
            s_cur = t_max_x;
            t_max_x += t_dx;
            if (col < 0 || col >= n) break;
        } else {
            row += step_row;
            s_cur = t_max_y;
            t_max_y += t_dy;
            if (row < 0 || row >= n) break;
        }
    }
}

}  // namespace detail

inline ProjectionMatrix build_system_matrix(int n, const std::vector<double>& angles_deg, int p) {
    if (n < 1) throw std::invalid_argument("build_system_matrix: n must be >= 1");
    if (p < 1) throw std::invalid_argument("build_system_matrix: p must be >= 1");
    if (angles_deg.empty()) throw std::invalid_argument("build_system_matrix: no angles");
    std::set<double> seen;
    for (double a : angles_deg) {
        if (!(a >= 0.0 && a < 180.0)) throw std::invalid_argument("build_system_matrix: angle outside [0,180)");
        if (!seen.insert(a).second) std::fprintf(stderr, "warning: duplicate projection angle %g deg\n", a);
    }

    ProjectionMatrix pm;
    pm.n = n;
    pm.p = p;
    pm.angles_deg = angles_deg;

    const std::uint32_t rows = static_cast<std::uint32_t>(p) * static_cast<std::uint32_t>(angles_deg.size());
    const std::uint32_t cols = static_cast<std::uint32_t>(n) * static_cast<std::uint32_t>(n);
    CsrMatrix& m = pm.A;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(rows + 1, 0);
    m.col_idx.reserve(static_cast<std::size_t>(rows) * 2 * n);
    m.values.reserve(static_cast<std::size_t>(rows) * 2 * n);

    std::vector<std::pair<std::uint32_t, double>> cells;
    for (std::size_t a = 0; a < angles_deg.size(); ++a) {
        const detail::RayDir dir = detail::ray_dir(angles_deg[a]);
        for (int k = 0; k < p; ++k) {
            cells.clear();
            detail::trace_ray(n, dir, detector_coord(p, k), [&](int row, int col, double len) {
                cells.emplace_back(static_cast<std::uint32_t>(row) * n + col, len);
            });
            std::sort(cells.begin(), cells.end());
            const std::uint32_t r = static_cast<std::uint32_t>(a) * p + k;
            for (const auto& [c, len] : cells) {
                m.col_idx.push_back(c);
                m.values.push_back(len);
            }
            m.row_ptr[r + 1] = m.values.size();
        }
    }
    return pm;
}

inline Sinogram project(const ProjectionMatrix& pm, const Vec& x) {
    if (x.size() != pm.A.cols) throw std::invalid_argument("project: image size mismatch");
    Sinogram s(pm.p, pm.q());
    pm.A.multiply(x, s.data);
    return s;
}

inline Sinogram project(const ProjectionMatrix& pm, const Image& img) {
    if (img.n != pm.n) throw std::invalid_argument("project: image side mismatch");
    return project(pm, img.data);
}

// Scales b to counts with the factor c = sum(b) / (level^2 * ||b||^2), draws
// Poisson(c*b_i)/c. This choice makes E||b~ - b|| / ||b|| equal `level`, so
// Poisson and Gaussian levels are directly comparable.
inline Sinogram add_poisson_noise(const Sinogram& sino, double level, std::uint64_t seed) {
    if (!(level >= 0.0 && level < 1.0)) throw std::invalid_argument("add_poisson_noise: level must be in [0,1)");
    for (double v : sino.data)
        if (v < 0.0) throw std::invalid_argument("add_poisson_noise: negative sinogram entry");
    Sinogram out = sino;
    if (level == 0.0) return out;
    double sum = 0.0, nsq = 0.0;
    for (double v : sino.data) {
        sum += v;
        nsq += v * v;
    }
    if (sum == 0.0) return out;  // all-zero sinogram: Poisson(0) = 0
    const double c = sum / (level * level * nsq);
    std::mt19937_64 rng(seed);
    for (double& v : out.data) {
        if (v == 0.0) continue;
        std::poisson_distribution<long long> d(c * v);
        v = static_cast<double>(d(rng)) / c;
    }
    return out;
}

// Additive white Gaussian noise with sigma = level * ||b|| / sqrt(p*q).
inline Sinogram add_gaussian_noise(const Sinogram& sino, double level, std::uint64_t seed) {
    if (!(level >= 0.0 && level < 1.0)) throw std::invalid_argument("add_gaussian_noise: level must be in [0,1)");
    for (double v : sino.data)
        if (v < 0.0) throw std::invalid_argument("add_gaussian_noise: negative sinogram entry");
    Sinogram out = sino;
    if (level == 0.0) return out;
    const double nrm = norm2(sino.data);
    if (nrm == 0.0) return out;
    const double sigma = level * nrm / std::sqrt(static_cast<double>(sino.data.size()));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, sigma);
    for (double& v : out.data) v += d(rng);
    return out;
}

}  // namespace agtv
