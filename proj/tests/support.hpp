#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "gaal/tensor.hpp"

namespace gaal::testing {

inline double relative_error(double analytic, double numeric) {
    return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
}

/// Central difference of `f` with respect to entry `i` of `x`.
inline double central_difference(const std::function<double(const Tensor&)>& f, const Tensor& x, std::size_t i,
                                 double h = 1e-5) {
    Tensor plus = x, minus = x;
    plus[i] += h;
    minus[i] -= h;
    return (f(plus) - f(minus)) / (2.0 * h);
}

inline void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

/// IDX image file assembled byte by byte: magic, count, rows, cols, pixels.
inline std::vector<std::uint8_t> golden_idx_images(std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                                                   std::uint32_t seed = 1) {
    std::vector<std::uint8_t> out;
    push_be32(out, 0x00000803);
    push_be32(out, count);
    push_be32(out, rows);
    push_be32(out, cols);
    std::uint32_t state = seed;
    for (std::uint32_t i = 0; i < count * rows * cols; ++i) {
        state = state * 1664525u + 1013904223u;
        out.push_back(static_cast<std::uint8_t>(state >> 24));
    }
    return out;
}

inline std::vector<std::uint8_t> golden_idx_labels(const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> out;
    push_be32(out, 0x00000801);
    push_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

}  // namespace gaal::testing
