#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "covtest/linalg.hpp"

namespace covtest::io {

// CMX1 layout: "CMX1", uint32 M, uint32 N (little-endian), then M*N entries in
// row-major order, each a little-endian float64 real part followed by the
// imaginary part. The file is exactly 12 + 16 M N bytes.

void write_cmx1(const std::filesystem::path& path, const CMatrix& data);

/// Throws DataError on a bad magic, a size mismatch or non-finite entries.
CMatrix read_cmx1(const std::filesystem::path& path);

/// Multichannel complex image. Column x + y * width of `pixels` holds the
/// channel vector of pixel (x, y).
struct ComplexImage {
    int width = 0;
    int height = 0;
    CMatrix pixels;  // channels x (width * height)

    int channels() const noexcept { return static_cast<int>(pixels.rows()); }
    Eigen::Index index(int x, int y) const noexcept {
        return static_cast<Eigen::Index>(y) * width + x;
    }
};

// Image on disk: a JSON sidecar {"width", "height", "channels",
// "dtype": "c128-planar", "data": <file>} and a planar data file holding, for
// each channel in turn, width * height little-endian (re, im) float64 pairs in
// row-major pixel order. "data" is resolved relative to the sidecar and
// defaults to the sidecar path with extension ".c128".

void write_image(const std::filesystem::path& sidecar, const ComplexImage& image);
ComplexImage read_image(const std::filesystem::path& sidecar);

/// Boolean raster stored as JSON {"width", "height", "mask": [0/1, ...]} in
/// row-major order.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<char> values;
};

void write_mask(const std::filesystem::path& path, const Mask& mask);
Mask read_mask(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace covtest::io
