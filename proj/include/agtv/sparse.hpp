// Compressed-sparse-row matrix with just the operations the solvers need:
// A*x, A^T*y, and row access for the row-action methods.
#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "agtv/numeric.hpp"

namespace agtv {

struct CsrMatrix {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint64_t> row_ptr;  // rows + 1
    std::vector<std::uint32_t> col_idx;  // nnz
    Vec values;                          // nnz

    std::uint64_t nnz() const { return values.size(); }

    void multiply(const Vec& x, Vec& out) const {
        if (x.size() != cols) throw std::invalid_argument("CsrMatrix::multiply: dimension mismatch");
        out.assign(rows, 0.0);
        for (std::uint32_t r = 0; r < rows; ++r) {
            double s = 0.0;
            for (std::uint64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += values[k] * x[col_idx[k]];
            out[r] = s;
        }
    }

    void multiply_transpose(const Vec& y, Vec& out) const {
        if (y.size() != rows) throw std::invalid_argument("CsrMatrix::multiply_transpose: dimension mismatch");
        out.assign(cols, 0.0);
        for (std::uint32_t r = 0; r < rows; ++r) {
            const double yr = y[r];
            if (yr == 0.0) continue;
            for (std::uint64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) out[col_idx[k]] += values[k] * yr;
        }
    }

    Vec multiply(const Vec& x) const {
        Vec out;
        multiply(x, out);
        return out;
    }

    Vec multiply_transpose(const Vec& y) const {
        Vec out;
        multiply_transpose(y, out);
        return out;
    }

    double row_norm_sq(std::uint32_t r) const {
        double s = 0.0;
        for (std::uint64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += values[k] * values[k];
        return s;
    }

    double row_dot(std::uint32_t r, const Vec& x) const {
        double s = 0.0;
        for (std::uint64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += values[k] * x[col_idx[k]];
        return s;
    }

    // out += alpha * (row r of A), used by Kaczmarz updates.
    void row_axpy(std::uint32_t r, double alpha, Vec& out) const {
        for (std::uint64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) out[col_idx[k]] += alpha * values[k];
    }
};

struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double value;
};

// Triplets may arrive unsorted; duplicates within a row are summed.
inline CsrMatrix csr_from_triplets(std::uint32_t rows, std::uint32_t cols, std::vector<Triplet> trip) {
    std::sort(trip.begin(), trip.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(rows + 1, 0);
    m.col_idx.reserve(trip.size());
    m.values.reserve(trip.size());
    for (std::size_t i = 0; i < trip.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < trip.size() && trip[j].row == trip[i].row && trip[j].col == trip[i].col) sum += trip[j++].value;
        m.col_idx.push_back(trip[i].col);
        m.values.push_back(sum);
        m.row_ptr[trip[i].row + 1]++;
        i = j;
    }
    for (std::uint32_t r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    return m;
}

}  // namespace agtv
