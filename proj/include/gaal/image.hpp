#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gaal/tensor.hpp"

namespace gaal {

struct ImageShape {
    std::size_t rows = 1;
    std::size_t cols = 1;
};

/// Square side when `dim` is a perfect square, otherwise a 1 x dim strip.
ImageShape image_shape_for(std::size_t dim);

/// Grayscale bytes from an instance in [-1,1] via round((x+1) * 127.5).
std::vector<std::uint8_t> to_gray_bytes(const Tensor& x);

/// Binary PGM (P5), 8-bit.
std::vector<std::uint8_t> encode_pgm(std::span<const std::uint8_t> gray, ImageShape shape);
/// 8-bit grayscale PNG (zlib-compressed IDAT, filter 0 on every row).
std::vector<std::uint8_t> encode_png(std::span<const std::uint8_t> gray, ImageShape shape);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace gaal
