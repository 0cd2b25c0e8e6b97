// File formats.
//
//   image    "AGTVIMG1" | u32 n    | u32 reserved          | f64[n*n] row-major
//   sinogram "AGTVSIN1" | u32 p    | u32 q                 | f64[p*q] angle-major
//   matrix   "AGTVCSR1" | u32 rows | u32 cols | u32 n | u32 p | u32 q
//            | f64 angles[q] | u64 nnz | u64 row_ptr[rows+1]
//            | u32 col_idx[nnz] | f64 values[nnz]
//
// All binary payloads are little-endian. Writes go through a temp file and a
// rename so partially written outputs never appear under the final name.
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "agtv/errors.hpp"
#include "agtv/image.hpp"
#include "agtv/patch_graph.hpp"
#include "agtv/phantom.hpp"
#include "agtv/projector.hpp"

namespace agtv {

namespace detail {

inline void write_bytes(std::ofstream& f, const void* p, std::size_t len) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
}

inline void read_bytes(std::ifstream& f, void* p, std::size_t len, const std::string& what) {
    f.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
    if (!f) throw config_error("truncated or unreadable " + what);
}

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
    write_bytes(f, &v, sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f, const std::string& what) {
    T v{};
    read_bytes(f, &v, sizeof(T), what);
    return v;
}

inline void check_magic(std::ifstream& f, const char* magic, const std::string& what) {
    char buf[8];
    read_bytes(f, buf, 8, what);
    if (std::memcmp(buf, magic, 8) != 0) throw config_error(what + ": bad magic (expected " + magic + ")");
}

// Writer that lands atomically under `path` once closed.
class AtomicFile {
  public:
    explicit AtomicFile(const std::filesystem::path& path)
        : final_(path), tmp_(path.string() + ".tmp"), f_(tmp_, std::ios::binary | std::ios::trunc) {
        if (!f_) throw config_error("cannot open for writing: " + tmp_.string());
    }
    std::ofstream& stream() { return f_; }
    void commit() {
        f_.flush();
        if (!f_) throw config_error("write failed: " + tmp_.string());
        f_.close();
        std::filesystem::rename(tmp_, final_);
    }

  private:
    std::filesystem::path final_, tmp_;
    std::ofstream f_;
};

}  // namespace detail

inline void write_image(const std::filesystem::path& path, const Image& img) {
    detail::AtomicFile out(path);
    auto& f = out.stream();
    detail::write_bytes(f, "AGTVIMG1", 8);
    detail::write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(img.n));
    detail::write_pod<std::uint32_t>(f, 0u);
    detail::write_bytes(f, img.data.data(), img.data.size() * sizeof(double));
    out.commit();
}

inline Image read_image(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot open image file: " + path.string());
    detail::check_magic(f, "AGTVIMG1", "image file " + path.string());
    const auto n = detail::read_pod<std::uint32_t>(f, "image header");
    detail::read_pod<std::uint32_t>(f, "image header");
    if (n == 0) throw config_error("image file has n = 0: " + path.string());
    Image img(static_cast<int>(n));
    detail::read_bytes(f, img.data.data(), img.data.size() * sizeof(double), "image data");
    return img;
}

inline void write_sinogram(const std::filesystem::path& path, const Sinogram& s) {
    detail::AtomicFile out(path);
    auto& f = out.stream();
    detail::write_bytes(f, "AGTVSIN1", 8);
    detail::write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(s.p));
    detail::write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(s.q));
    detail::write_bytes(f, s.data.data(), s.data.size() * sizeof(double));
    out.commit();
}

inline Sinogram read_sinogram(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot open sinogram file: " + path.string());
    detail::check_magic(f, "AGTVSIN1", "sinogram file " + path.string());
    const auto p = detail::read_pod<std::uint32_t>(f, "sinogram header");
    const auto q = detail::read_pod<std::uint32_t>(f, "sinogram header");
    if (p == 0 || q == 0) throw config_error("sinogram file has empty shape: " + path.string());
    Sinogram s(static_cast<int>(p), static_cast<int>(q));
    detail::read_bytes(f, s.data.data(), s.data.size() * sizeof(double), "sinogram data");
    return s;
}

inline void write_projection_matrix(const std::filesystem::path& path, const ProjectionMatrix& pm) {
    detail::AtomicFile out(path);
    auto& f = out.stream();
    detail::write_bytes(f, "AGTVCSR1", 8);
    detail::write_pod<std::uint32_t>(f, pm.A.rows);
    detail::write_pod<std::uint32_t>(f, pm.A.cols);
    detail::write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(pm.n));
    detail::write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(pm.p));
    detail::write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(pm.q()));
    detail::write_bytes(f, pm.angles_deg.data(), pm.angles_deg.size() * sizeof(double));
    detail::write_pod<std::uint64_t>(f, pm.A.nnz());
    detail::write_bytes(f, pm.A.row_ptr.data(), pm.A.row_ptr.size() * sizeof(std::uint64_t));
    detail::write_bytes(f, pm.A.col_idx.data(), pm.A.col_idx.size() * sizeof(std::uint32_t));
    detail::write_bytes(f, pm.A.values.data(), pm.A.values.size() * sizeof(double));
    out.commit();
}

inline ProjectionMatrix read_projection_matrix(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot open matrix file: " + path.string());
    detail::check_magic(f, "AGTVCSR1", "matrix file " + path.string());
    ProjectionMatrix pm;
    pm.A.rows = detail::read_pod<std::uint32_t>(f, "matrix header");
    pm.A.cols = detail::read_pod<std::uint32_t>(f, "matrix header");
    pm.n = static_cast<int>(detail::read_pod<std::uint32_t>(f, "matrix header"));
    pm.p = static_cast<int>(detail::read_pod<std::uint32_t>(f, "matrix header"));
    const auto q = detail::read_pod<std::uint32_t>(f, "matrix header");
    pm.angles_deg.resize(q);
    detail::read_bytes(f, pm.angles_deg.data(), q * sizeof(double), "matrix angles");
    const auto nnz = detail::read_pod<std::uint64_t>(f, "matrix header");
    pm.A.row_ptr.resize(pm.A.rows + 1);
    detail::read_bytes(f, pm.A.row_ptr.data(), pm.A.row_ptr.size() * sizeof(std::uint64_t), "matrix row_ptr");
    pm.A.col_idx.resize(nnz);
    detail::read_bytes(f, pm.A.col_idx.data(), nnz * sizeof(std::uint32_t), "matrix col_idx");
    pm.A.values.resize(nnz);
    detail::read_bytes(f, pm.A.values.data(), nnz * sizeof(double), "matrix values");
    return pm;
}

// 16-bit binary PGM (P5, big-endian samples per the format), affinely
// mapping [min, max] to [0, 65535]. Visualization aid only.
inline void write_pgm16(const std::filesystem::path& path, const Image& img) {
    double lo = img.data.empty() ? 0.0 : img.data[0], hi = lo;
    for (double v : img.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    detail::AtomicFile out(path);
    auto& f = out.stream();
    f << "P5\n" << img.n << " " << img.n << "\n65535\n";
    for (double v : img.data) {
        const auto u = static_cast<std::uint16_t>(std::lround((v - lo) / span * 65535.0));
        const unsigned char bytes[2] = {static_cast<unsigned char>(u >> 8), static_cast<unsigned char>(u & 0xff)};
        detail::write_bytes(f, bytes, 2);
    }
    out.commit();
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_sinogram_csv(const std::filesystem::path& path, const Sinogram& s) {
    detail::AtomicFile out(path);
    auto& f = out.stream();
    f << "angle_index,ray_index,value\n";
    for (int a = 0; a < s.q; ++a)
        for (int r = 0; r < s.p; ++r) f << a << "," << r << "," << format_double(s.at(r, a)) << "\n";
    out.commit();
}

// Debug edge-list dump: one header line, then "i j w" per undirected edge.
inline void write_graph(const std::filesystem::path& path, const PatchGraph& g, int n, int K) {
    detail::AtomicFile out(path);
    auto& f = out.stream();
    f << "# n=" << n << " K=" << K << " sigma=" << format_double(g.sigma) << "\n";
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        f << g.edge_i[e] << " " << g.edge_j[e] << " " << format_double(g.weight[e]) << "\n";
    out.commit();
}

// Ellipse phantom spec: one [ellipse] section per ellipse with keys
// center_x, center_y, a, b, theta_deg, intensity.
inline std::vector<EllipseSpec> read_ellipse_spec(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open phantom spec: " + path.string());
    std::vector<EllipseSpec> spec;
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        if (line == "[ellipse]") {
            spec.emplace_back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        if (spec.empty())
            throw config_error(path.string() + ":" + std::to_string(lineno) + ": key before any [ellipse] section");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        double x = 0.0;
        try {
            x = std::stod(val);
        } catch (const std::exception&) {
            throw config_error(path.string() + ":" + std::to_string(lineno) + ": bad number '" + val + "'");
        }
        EllipseSpec& e = spec.back();
        if (key == "center_x")
            e.center_x = x;
        else if (key == "center_y")
            e.center_y = x;
        else if (key == "a")
            e.semi_axis_a = x;
        else if (key == "b")
            e.semi_axis_b = x;
        else if (key == "theta_deg")
            e.rotation = x * M_PI / 180.0;
        else if (key == "intensity")
            e.additive_intensity = x;
        else
            throw config_error(path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (spec.empty()) throw config_error(path.string() + ": no [ellipse] sections");
    return spec;
}

}  // namespace agtv
