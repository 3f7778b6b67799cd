#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gaal/tensor.hpp"

namespace gaal {

/// Binary-labeled instances normalized to [-1, 1]. Labels are -1 or +1.
struct Dataset {
    std::vector<Tensor> instances;
    std::vector<int> labels;
    std::string source_tag;
    std::size_t feature_dim = 0;

    std::size_t size() const noexcept { return instances.size(); }
    bool empty() const noexcept { return instances.empty(); }
    /// Throws ContractError if counts, dims, labels or the [-1,1] range are violated.
    void validate() const;
    /// Instances stacked as [size, feature_dim].
    Tensor as_matrix() const;
};

/// Instances with arbitrary integer class labels (e.g. digits 0-9).
struct MulticlassDataset {
    std::vector<Tensor> instances;
    std::vector<int> labels;
    std::string source_tag;
    std::size_t feature_dim = 0;
};

struct ShiftSpec {
    std::vector<double> translation;  // empty means no translation
    double noise_sigma = 0.0;
    double rotation_angle = 0.0;  // radians, 2-D only

    bool is_identity() const;
};

/// n/2 points per class, Gaussian around each mean, clipped to [-1, 1].
/// Instances alternate +1, -1, +1, ... Throws ConfigError on odd n,
/// non-positive sigma, or means outside (-1, 1).
Dataset make_two_gaussians(std::size_t n, std::span<const double> mean_pos, std::span<const double> mean_neg,
                           double sigma, std::uint64_t seed);

/// Rotate (about the origin), translate, add isotropic noise, then re-clip.
/// Labels and order are preserved.
Dataset apply_shift(const Dataset& dataset, const ShiftSpec& spec, std::uint64_t seed);

/// Sign of (mean_pos - mean_neg) . (x - midpoint): the Bayes rule for two
/// isotropic Gaussians of equal spread and weight.
std::function<double(std::span<const double>)> bisector_labeler(std::vector<double> mean_pos,
                                                                std::vector<double> mean_neg);

// IDX container --------------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxImages {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::vector<std::uint8_t>> images;  // each rows*cols bytes, row-major
};

struct IdxLabels {
    std::vector<std::uint8_t> labels;
};

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
IdxLabels parse_idx_labels(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images);
std::vector<std::uint8_t> serialize_idx_labels(const IdxLabels& labels);

struct IdxDataset {
    IdxImages images;
    IdxLabels labels;
};

/// Parses both files and enforces matching counts.
IdxDataset load_idx(const std::filesystem::path& image_path, const std::filesystem::path& label_path);

/// byte v -> v / 127.5 - 1
double normalize_byte(std::uint8_t v);
std::uint8_t denormalize_value(double x);
Tensor normalize(std::span<const std::uint8_t> bytes);

MulticlassDataset to_multiclass(const IdxDataset& idx, std::string source_tag = "idx");

/// Keeps classes a and b (a -> +1, b -> -1), preserving order. A missing
/// class is reported through `warnings` rather than an exception.
Dataset filter_binary(const MulticlassDataset& dataset, int class_a, int class_b,
                      std::vector<std::string>* warnings = nullptr);

/// CSV with header `label,f0,f1,...` and 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& dataset);
Dataset read_dataset_csv(std::istream& in, std::string source_tag = "csv");

}  // namespace gaal
