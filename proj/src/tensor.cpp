#include "gaal/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "gaal/errors.hpp"

namespace gaal {

std::string shape_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << 'x';
        out << shape[i];
    }
    out << ']';
    return out.str();
}

std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

void check_extents(const Shape& shape) {
    for (auto extent : shape)
        if (extent == 0) throw DimensionError("tensor extents must be positive, got " + shape_string(shape));
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_extents(shape_);
    data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_extents(shape_);
    if (shape_numel(shape_) != data_.size())
        throw DimensionError("shape " + shape_string(shape_) + " needs " + std::to_string(shape_numel(shape_)) +
                             " values, got " + std::to_string(data_.size()));
}

Tensor Tensor::vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor(Shape{n}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<double> flat;
    std::size_t width = rows.size() ? rows.begin()->size() : 0;
    for (const auto& r : rows) {
        if (r.size() != width) throw DimensionError("ragged matrix literal");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return Tensor(Shape{rows.size(), width}, std::move(flat));
}

std::size_t Tensor::rows() const {
    if (rank() == 2) return shape_[0];
    if (rank() <= 1) return 1;
    throw DimensionError("rows() needs rank <= 2, got " + shape_string(shape_));
}

std::size_t Tensor::cols() const {
    if (rank() == 2) return shape_[1];
    if (rank() == 1) return shape_[0];
    if (rank() == 0) return 1;
    throw DimensionError("cols() needs rank <= 2, got " + shape_string(shape_));
}

double Tensor::item() const {
    if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape_));
    return data_[0];
}

std::span<const double> Tensor::row(std::size_t r) const {
    const std::size_t width = cols();
    return std::span<const double>(data_).subspan(r * width, width);
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw DimensionError("matmul shape mismatch: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out(Shape{m, n});
    auto o = out.data();
    auto ad = a.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ad[i * k + p];
            if (aip == 0.0) continue;
            const double* brow = &bd[p * n];
            double* orow = &o[i * n];
            for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw DimensionError("transpose needs a matrix, got " + shape_string(a.shape()));
    const std::size_t m = a.dim(0), n = a.dim(1);
    Tensor out(Shape{n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionError("dot length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionError("distance length mismatch: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

Tensor stack_rows(std::span<const Tensor> rows) {
    if (rows.empty()) throw ContractError("stack_rows needs at least one row");
    const std::size_t width = rows.front().numel();
    std::vector<double> flat;
    flat.reserve(rows.size() * width);
    for (const auto& r : rows) {
        if (r.numel() != width)
            throw DimensionError("stack_rows: row of " + std::to_string(r.numel()) + " values, expected " +
                                 std::to_string(width));
        flat.insert(flat.end(), r.values().begin(), r.values().end());
    }
    return Tensor(Shape{rows.size(), width}, std::move(flat));
}

Tensor stack_rows(const std::vector<std::vector<double>>& rows) {
    std::vector<Tensor> ts;
    ts.reserve(rows.size());
    for (const auto& r : rows) ts.push_back(Tensor::vector(r));
    return stack_rows(ts);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + " shape mismatch: " + shape_string(a.shape()) + " vs " +
                             shape_string(b.shape()));
}

}  // namespace gaal
