#include "covtest/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "covtest/errors.hpp"

namespace covtest::io {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

template <class T>
void put(std::string& buf, T v) {
    const T le = to_little(v);
    char raw[sizeof(T)];
    std::memcpy(raw, &le, sizeof(T));
    buf.append(raw, sizeof(T));
}

template <class T>
T get(const std::string& buf, std::size_t offset) {
    T v;
    std::memcpy(&v, buf.data() + offset, sizeof(T));
    return to_little(v);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw DataError("write failed for " + path.string());
    }
}

int positive_int(const nlohmann::json& j, const char* key, const std::filesystem::path& where) {
    if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long long>() < 1 ||
        j.at(key).get<long long>() > (1LL << 30)) {
        throw DataError(where.string() + ": field '" + key + "' must be a positive integer");
    }
    return j.at(key).get<int>();
}

constexpr std::size_t kCmxHeader = 12;

}  // namespace

void write_cmx1(const std::filesystem::path& path, const CMatrix& data) {
    if (data.rows() < 1 || data.cols() < 1 || data.rows() > UINT32_MAX || data.cols() > UINT32_MAX) {
        throw ShapeError("CMX1 matrices must have between 1 and 2^32 - 1 rows and columns");
    }
    if (!data.allFinite()) {
        throw DataError("CMX1 entries must be finite");
    }
    std::string buf;
    buf.reserve(kCmxHeader + 16 * static_cast<std::size_t>(data.size()));
    buf.append("CMX1", 4);
    put(buf, static_cast<std::uint32_t>(data.rows()));
    put(buf, static_cast<std::uint32_t>(data.cols()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            put(buf, data(i, j).real());
            put(buf, data(i, j).imag());
        }
    }
    dump(path, buf);
}

CMatrix read_cmx1(const std::filesystem::path& path) {
    const std::string buf = slurp(path);
    if (buf.size() < kCmxHeader || buf.compare(0, 4, "CMX1") != 0) {
        throw DataError(path.string() + ": not a CMX1 file");
    }
    const auto m = get<std::uint32_t>(buf, 4);
    const auto n = get<std::uint32_t>(buf, 8);
    if (m == 0 || n == 0) {
        throw DataError(path.string() + ": empty CMX1 matrix");
    }
    const std::uint64_t expected = kCmxHeader + 16ULL * m * n;
    if (buf.size() != expected) {
        throw DataError(path.string() + ": payload is " + std::to_string(buf.size()) +
                        " bytes, header implies " + std::to_string(expected));
    }
    CMatrix data(m, n);
    std::size_t offset = kCmxHeader;
    for (std::uint32_t i = 0; i < m; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) {
            const double re = get<double>(buf, offset);
            const double im = get<double>(buf, offset + 8);
            offset += 16;
            if (!std::isfinite(re) || !std::isfinite(im)) {
                throw DataError(path.string() + ": non-finite entry");
            }
            data(i, j) = {re, im};
        }
    }
    return data;
}

void write_image(const std::filesystem::path& sidecar, const ComplexImage& image) {
    if (image.width < 1 || image.height < 1 || image.channels() < 1 ||
        image.pixels.cols() != static_cast<Eigen::Index>(image.width) * image.height) {
        throw ShapeError("image dimensions do not match its pixel matrix");
    }
    std::filesystem::path data_path = sidecar;
    data_path.replace_extension(".c128");
    std::string buf;
    buf.reserve(16 * static_cast<std::size_t>(image.pixels.size()));
    for (Eigen::Index c = 0; c < image.pixels.rows(); ++c) {
        for (Eigen::Index p = 0; p < image.pixels.cols(); ++p) {
            put(buf, image.pixels(c, p).real());
            put(buf, image.pixels(c, p).imag());
        }
    }
    dump(data_path, buf);
    const nlohmann::json meta = {{"width", image.width},
                                 {"height", image.height},
                                 {"channels", image.channels()},
                                 {"dtype", "c128-planar"},
                                 {"data", data_path.filename().string()}};
    write_text(sidecar, meta.dump(2) + "\n");
}

ComplexImage read_image(const std::filesystem::path& sidecar) {
    const nlohmann::json meta = read_json(sidecar);
    ComplexImage image;
    image.width = positive_int(meta, "width", sidecar);
    image.height = positive_int(meta, "height", sidecar);
    const int channels = positive_int(meta, "channels", sidecar);
    if (!meta.contains("dtype") || meta.at("dtype") != "c128-planar") {
        throw DataError(sidecar.string() + ": dtype must be \"c128-planar\"");
    }
    std::filesystem::path data_path = sidecar;
    data_path.replace_extension(".c128");
    if (meta.contains("data")) {
        if (!meta.at("data").is_string()) {
            throw DataError(sidecar.string() + ": field 'data' must be a string");
        }
        data_path = sidecar.parent_path() / meta.at("data").get<std::string>();
    }
    const std::string buf = slurp(data_path);
    const auto count = static_cast<std::uint64_t>(image.width) * image.height;
    if (buf.size() != 16ULL * count * channels) {
        throw DataError(data_path.string() + ": size does not match the sidecar dimensions");
    }
    image.pixels.resize(channels, static_cast<Eigen::Index>(count));
    std::size_t offset = 0;
    for (int c = 0; c < channels; ++c) {
        for (std::uint64_t p = 0; p < count; ++p) {
            const double re = get<double>(buf, offset);
            const double im = get<double>(buf, offset + 8);
            offset += 16;
            if (!std::isfinite(re) || !std::isfinite(im)) {
                throw DataError(data_path.string() + ": non-finite pixel value");
            }
            image.pixels(c, static_cast<Eigen::Index>(p)) = {re, im};
        }
    }
    return image;
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
    if (mask.values.size() != static_cast<std::size_t>(mask.width) * mask.height) {
        throw ShapeError("mask size does not match its dimensions");
    }
    std::vector<int> flat(mask.values.begin(), mask.values.end());
    const nlohmann::json j = {{"width", mask.width}, {"height", mask.height}, {"mask", flat}};
    write_text(path, j.dump() + "\n");
}

Mask read_mask(const std::filesystem::path& path) {
    const nlohmann::json j = read_json(path);
    Mask mask;
    mask.width = positive_int(j, "width", path);
    mask.height = positive_int(j, "height", path);
    if (!j.contains("mask") || !j.at("mask").is_array() ||
        j.at("mask").size() != static_cast<std::size_t>(mask.width) * mask.height) {
        throw DataError(path.string() + ": 'mask' must be an array of width * height entries");
    }
    mask.values.reserve(j.at("mask").size());
    for (const auto& v : j.at("mask")) {
        if (v.is_boolean()) {
            mask.values.push_back(v.get<bool>() ? 1 : 0);
        } else if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) {
            mask.values.push_back(static_cast<char>(v.get<int>()));
        } else {
            throw DataError(path.string() + ": mask entries must be 0/1 or booleans");
        }
    }
    return mask;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    const std::string text = slurp(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": invalid JSON (" + e.what() + ")");
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) { dump(path, text); }

}  // namespace covtest::io
