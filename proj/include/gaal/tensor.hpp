#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gaal {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Dense row-major array of doubles. Rank 0 is a scalar; vectors are rank 1,
/// matrices and batches rank 2.
class Tensor {
public:
    Tensor() : shape_{}, data_{0.0} {}
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double value) { return Tensor(Shape{}, std::vector<double>{value}); }
    static Tensor vector(std::vector<double> values);
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t numel() const noexcept { return data_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    /// Rows of a rank-2 tensor; 1 for a vector.
    std::size_t rows() const;
    /// Columns of a rank-2 tensor; length of a vector.
    std::size_t cols() const;

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    double item() const;

    std::span<const double> row(std::size_t r) const;
    Tensor reshaped(Shape shape) const;

    bool all_finite() const;
    bool operator==(const Tensor& other) const = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Standard matrix product of [m,k] x [k,n]. Throws DimensionError naming
/// both shapes when the inner extents disagree.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Stack equal-length vectors into a [count, dim] batch.
Tensor stack_rows(std::span<const Tensor> rows);
Tensor stack_rows(const std::vector<std::vector<double>>& rows);

void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace gaal
