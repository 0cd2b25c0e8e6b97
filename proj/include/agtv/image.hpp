// Square grayscale image; the reconstruction unknown and ground truth.
//
// Geometry convention used across the toolkit: the image covers the square
// [-1,1]^2, pixel (row 0, col 0) sits at the top-left corner, rows grow
// downward (decreasing y), columns grow rightward (increasing x). Pixel
// values are stored row-major, so vec(X) in the solver modules means this
// row-major layout.
#pragma once

#include <stdexcept>

#include "agtv/numeric.hpp"

namespace agtv {

struct Image {
    int n = 0;
    Vec data;  // n*n, row-major

    Image() = default;
    explicit Image(int side) : n(side), data(static_cast<std::size_t>(side) * side, 0.0) {
        if (side < 1) throw std::invalid_argument("Image: side must be >= 1");
    }
    Image(int side, Vec values) : n(side), data(std::move(values)) {
        if (side < 1) throw std::invalid_argument("Image: side must be >= 1");
        if (data.size() != static_cast<std::size_t>(side) * side)
            throw std::invalid_argument("Image: data length != n*n");
    }

    double& at(int row, int col) { return data[static_cast<std::size_t>(row) * n + col]; }
    double at(int row, int col) const { return data[static_cast<std::size_t>(row) * n + col]; }
    std::size_t size() const { return data.size(); }
};

// Center of pixel (row, col) in [-1,1]^2 coordinates.
inline double pixel_center_x(int n, int col) { return -1.0 + (col + 0.5) * (2.0 / n); }
inline double pixel_center_y(int n, int row) { return 1.0 - (row + 0.5) * (2.0 / n); }

}  // namespace agtv
