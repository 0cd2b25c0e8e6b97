// Analytic ellipse phantoms rasterized onto the n x n pixel grid.
//
// Rasterization rule: a pixel's value is the sum of the additive intensities
// of all ellipses whose interior (boundary included) contains the pixel
// center. No sub-pixel anti-aliasing, so identical inputs give bit-identical
// images.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "agtv/image.hpp"

namespace agtv {

struct EllipseSpec {
    double center_x = 0.0;  // in [-1,1]
    double center_y = 0.0;  // in [-1,1]
    double semi_axis_a = 0.5;
    double semi_axis_b = 0.5;
    double rotation = 0.0;  // radians, counter-clockwise
    double additive_intensity = 1.0;
};

inline bool ellipse_contains(const EllipseSpec& e, double x, double y) {
    const double dx = x - e.center_x;
    const double dy = y - e.center_y;
    const double c = std::cos(e.rotation);
    const double s = std::sin(e.rotation);
    const double u = dx * c + dy * s;
    const double v = -dx * s + dy * c;
    const double ra = u / e.semi_axis_a;
    const double rb = v / e.semi_axis_b;
    return ra * ra + rb * rb <= 1.0;
}

enum class SheppLoganVariant {
    kModified,  // high-contrast interior (default)
    kOriginal,  // 1974 intensities
};

// The canonical 10-ellipse table. Geometry is shared by both variants; only
// the additive intensities differ.
inline std::vector<EllipseSpec> shepp_logan_spec(SheppLoganVariant variant = SheppLoganVariant::kModified) {
    struct Row {
        double a, b, x0, y0, phi_deg, original, modified;
    };
    static constexpr std::array<Row, 10> table = {{
        {0.6900, 0.9200, 0.00, 0.0000, 0.0, 2.00, 1.00},
        {0.6624, 0.8740, 0.00, -0.0184, 0.0, -0.98, -0.80},
        {0.1100, 0.3100, 0.22, 0.0000, -18.0, -0.02, -0.20},
        {0.1600, 0.4100, -0.22, 0.0000, 18.0, -0.02, -0.20},
        {0.2100, 0.2500, 0.00, 0.3500, 0.0, 0.01, 0.10},
        {0.0460, 0.0460, 0.00, 0.1000, 0.0, 0.01, 0.10},
        {0.0460, 0.0460, 0.00, -0.1000, 0.0, 0.01, 0.10},
        {0.0460, 0.0230, -0.08, -0.6050, 0.0, 0.01, 0.10},
        {0.0230, 0.0230, 0.00, -0.6060, 0.0, 0.01, 0.10},
        {0.0230, 0.0460, 0.06, -0.6050, 0.0, 0.01, 0.10},
    }};
    std::vector<EllipseSpec> spec;
    spec.reserve(table.size());
    for (const Row& r : table) {
        EllipseSpec e;
        e.center_x = r.x0;
        e.center_y = r.y0;
        e.semi_axis_a = r.a;
        e.semi_axis_b = r.b;
        e.rotation = r.phi_deg * M_PI / 180.0;
        e.additive_intensity = (variant == SheppLoganVariant::kOriginal) ? r.original : r.modified;
        spec.push_back(e);
    }
    return spec;
}

inline Image ellipse_phantom(const std::vector<EllipseSpec>& spec, int n) {
    if (n < 1) throw std::invalid_argument("ellipse_phantom: n must be >= 1");
    if (spec.empty()) throw std::invalid_argument("ellipse_phantom: empty spec");
    for (const EllipseSpec& e : spec) {
        if (!(e.semi_axis_a > 0.0) || !(e.semi_axis_b > 0.0))
            throw std::invalid_argument("ellipse_phantom: semi-axes must be positive");
        if (!std::isfinite(e.center_x) || !std::isfinite(e.center_y) || !std::isfinite(e.semi_axis_a) ||
            !std::isfinite(e.semi_axis_b) || !std::isfinite(e.rotation) || !std::isfinite(e.additive_intensity))
            throw std::invalid_argument("ellipse_phantom: non-finite parameter");
    }
    Image img(n);
    for (int r = 0; r < n; ++r) {
        const double y = pixel_center_y(n, r);
        for (int c = 0; c < n; ++c) {
            const double x = pixel_center_x(n, c);
            double v = 0.0;
            for (const EllipseSpec& e : spec)
                if (ellipse_contains(e, x, y)) v += e.additive_intensity;
            img.at(r, c) = v;
        }
    }
    return img;
}

inline Image shepp_logan(int n, SheppLoganVariant variant = SheppLoganVariant::kModified) {
    if (n < 1) throw std::invalid_argument("shepp_logan: n must be >= 1");
    return ellipse_phantom(shepp_logan_spec(variant), n);
}

}  // namespace agtv
