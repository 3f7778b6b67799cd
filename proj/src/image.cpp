#include "gaal/image.hpp"

#include <cmath>
#include <string_view>

#include <zlib.h>

#include "gaal/binary_io.hpp"
#include "gaal/data.hpp"
#include "gaal/errors.hpp"

namespace gaal {

ImageShape image_shape_for(std::size_t dim) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(dim))));
    if (side > 1 && side * side == dim) return {side, side};
    return {1, dim};
}

std::vector<std::uint8_t> to_gray_bytes(const Tensor& x) {
    std::vector<std::uint8_t> out;
    out.reserve(x.numel());
    for (double v : x.data()) out.push_back(denormalize_value(v));
    return out;
}

namespace {

void check_pixels(std::span<const std::uint8_t> gray, ImageShape shape) {
    if (gray.size() != shape.rows * shape.cols)
        throw DimensionError("image of " + std::to_string(shape.rows) + "x" + std::to_string(shape.cols) + " needs " +
                             std::to_string(shape.rows * shape.cols) + " pixels, got " + std::to_string(gray.size()));
}

void put_chunk(std::vector<std::uint8_t>& out, const char* type, std::span<const std::uint8_t> body) {
    io::put_u32_be(out, static_cast<std::uint32_t>(body.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), body.begin(), body.end());
    const uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
    io::put_u32_be(out, static_cast<std::uint32_t>(crc));
}

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::vector<std::uint8_t> encode_pgm(std::span<const std::uint8_t> gray, ImageShape shape) {
    check_pixels(gray, shape);
    const std::string header = "P5\n" + std::to_string(shape.cols) + " " + std::to_string(shape.rows) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), gray.begin(), gray.end());
    return out;
}

std::vector<std::uint8_t> encode_png(std::span<const std::uint8_t> gray, ImageShape shape) {
    check_pixels(gray, shape);
    std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

    std::vector<std::uint8_t> ihdr;
    io::put_u32_be(ihdr, static_cast<std::uint32_t>(shape.cols));
    io::put_u32_be(ihdr, static_cast<std::uint32_t>(shape.rows));
    ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0});  // bit depth 8, grayscale, deflate, filter 0, no interlace
    put_chunk(out, "IHDR", ihdr);

    std::vector<std::uint8_t> raw;
    raw.reserve(shape.rows * (shape.cols + 1));
    for (std::size_t r = 0; r < shape.rows; ++r) {
        raw.push_back(0);
        raw.insert(raw.end(), gray.begin() + static_cast<std::ptrdiff_t>(r * shape.cols),
                   gray.begin() + static_cast<std::ptrdiff_t>((r + 1) * shape.cols));
    }
    uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> packed(packed_size);
    if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw Error("png: deflate failed");
    packed.resize(packed_size);
    put_chunk(out, "IDAT", packed);
    put_chunk(out, "IEND", {});
    return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = std::uint32_t(bytes[i]) << 16 | std::uint32_t(bytes[i + 1]) << 8 | bytes[i + 2];
        out += kAlphabet[v >> 18];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (i < bytes.size()) {
        std::uint32_t v = std::uint32_t(bytes[i]) << 16;
        if (i + 1 < bytes.size()) v |= std::uint32_t(bytes[i + 1]) << 8;
        out += kAlphabet[v >> 18];
        out += kAlphabet[(v >> 12) & 63];
        out += i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') break;
        const int v = value(c);
        if (v < 0) throw FormatError("base64: invalid character");
        acc = acc << 6 | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>(acc >> bits));
        }
    }
    return out;
}

}  // namespace gaal
