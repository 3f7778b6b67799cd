#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gaal::io {

void put_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_f64_le(std::vector<std::uint8_t>& out, double v);

/// Bounds-checked cursor over a byte buffer; throws FormatError on overrun.
class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

    std::uint32_t u32_le();
    std::uint32_t u32_be();
    double f64_le();
    std::span<const std::uint8_t> take(std::size_t n);
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace gaal::io
