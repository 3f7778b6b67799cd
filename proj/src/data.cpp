#include "gaal/data.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "gaal/binary_io.hpp"
#include "gaal/errors.hpp"
#include "gaal/rng.hpp"

namespace gaal {

void Dataset::validate() const {
    if (instances.size() != labels.size())
        throw ContractError("dataset has " + std::to_string(instances.size()) + " instances but " +
                            std::to_string(labels.size()) + " labels");
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (instances[i].numel() != feature_dim)
            throw ContractError("instance " + std::to_string(i) + " has " + std::to_string(instances[i].numel()) +
                                " features, expected " + std::to_string(feature_dim));
        if (labels[i] != 1 && labels[i] != -1)
            throw ContractError("label " + std::to_string(labels[i]) + " at " + std::to_string(i) + " is not +-1");
        for (double v : instances[i].data())
            if (!(v >= -1.0 && v <= 1.0)) throw ContractError("instance " + std::to_string(i) + " leaves [-1,1]");
    }
}

Tensor Dataset::as_matrix() const { return stack_rows(instances); }

bool ShiftSpec::is_identity() const {
    return noise_sigma == 0.0 && rotation_angle == 0.0 &&
           std::all_of(translation.begin(), translation.end(), [](double v) { return v == 0.0; });
}

Dataset make_two_gaussians(std::size_t n, std::span<const double> mean_pos, std::span<const double> mean_neg,
                           double sigma, std::uint64_t seed) {
    if (n % 2 != 0) throw ConfigError("two-Gaussians size must be even, got " + std::to_string(n), "pool_size");
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive", "sigma");
    if (mean_pos.size() != mean_neg.size() || mean_pos.empty())
        throw ConfigError("class means must share a positive dimension", "mean_pos");
    for (double m : mean_pos)
        if (!(m > -1.0 && m < 1.0)) throw ConfigError("mean_pos must lie inside (-1,1)", "mean_pos");
    for (double m : mean_neg)
        if (!(m > -1.0 && m < 1.0)) throw ConfigError("mean_neg must lie inside (-1,1)", "mean_neg");

    Rng rng(seed);
    Dataset ds;
    ds.source_tag = "two_gaussians";
    ds.feature_dim = mean_pos.size();
    ds.instances.reserve(n);
    ds.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool positive = i % 2 == 0;
        const auto mean = positive ? mean_pos : mean_neg;
        Tensor x(Shape{ds.feature_dim});
        for (std::size_t d = 0; d < ds.feature_dim; ++d) x[d] = std::clamp(rng.normal(mean[d], sigma), -1.0, 1.0);
        ds.instances.push_back(std::move(x));
        ds.labels.push_back(positive ? 1 : -1);
    }
    return ds;
}

Dataset apply_shift(const Dataset& dataset, const ShiftSpec& spec, std::uint64_t seed) {
    if (!spec.translation.empty() && spec.translation.size() != dataset.feature_dim)
        throw DimensionError("shift translation has " + std::to_string(spec.translation.size()) +
                             " entries, dataset has " + std::to_string(dataset.feature_dim) + " features");
    if (spec.rotation_angle != 0.0 && dataset.feature_dim != 2)
        throw ConfigError("rotation shift is only defined for 2-D data", "shift_rotation");
    if (spec.noise_sigma < 0.0) throw ConfigError("noise sigma must be non-negative", "shift_noise");

    Rng rng(seed);
    Dataset out = dataset;
    out.source_tag = dataset.source_tag + "+shift";
    const double c = std::cos(spec.rotation_angle), s = std::sin(spec.rotation_angle);
    for (auto& x : out.instances) {
        if (spec.rotation_angle != 0.0) {
            const double x0 = x[0], x1 = x[1];
            x[0] = c * x0 - s * x1;
            x[1] = s * x0 + c * x1;
        }
        for (std::size_t d = 0; d < x.numel(); ++d) {
            if (!spec.translation.empty()) x[d] += spec.translation[d];
            if (spec.noise_sigma > 0.0) x[d] += rng.normal(0.0, spec.noise_sigma);
            x[d] = std::clamp(x[d], -1.0, 1.0);
        }
    }
    return out;
}

std::function<double(std::span<const double>)> bisector_labeler(std::vector<double> mean_pos,
                                                                std::vector<double> mean_neg) {
    if (mean_pos.size() != mean_neg.size()) throw DimensionError("class means differ in dimension");
    std::vector<double> normal(mean_pos.size()), mid(mean_pos.size());
    for (std::size_t i = 0; i < mean_pos.size(); ++i) {
        normal[i] = mean_pos[i] - mean_neg[i];
        mid[i] = 0.5 * (mean_pos[i] + mean_neg[i]);
    }
    return [normal, mid](std::span<const double> x) {
        if (x.size() != normal.size()) throw DimensionError("labeling function dimension mismatch");
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) v += normal[i] * (x[i] - mid[i]);
        return v;
    };
}

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
    io::Reader in(bytes, "IDX images");
    const std::uint32_t magic = in.u32_be();
    if (magic != kIdxImageMagic) {
        std::ostringstream msg;
        msg << "IDX images: bad magic, expected 0x" << std::hex << std::setw(8) << std::setfill('0') << kIdxImageMagic
            << " got 0x" << std::setw(8) << magic;
        throw FormatError(msg.str());
    }
    const std::uint32_t count = in.u32_be();
    IdxImages out;
    out.rows = in.u32_be();
    out.cols = in.u32_be();
    const std::size_t pixels = std::size_t(out.rows) * out.cols;
    if (pixels == 0) throw FormatError("IDX images: zero-sized image dimensions");
    if (in.remaining() != std::size_t(count) * pixels)
        throw FormatError("IDX images: header promises " + std::to_string(count) + " images of " +
                          std::to_string(out.rows) + "x" + std::to_string(out.cols) + " (" +
                          std::to_string(std::size_t(count) * pixels) + " bytes) but payload has " +
                          std::to_string(in.remaining()) + " bytes (truncated or padded)");
    out.images.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        auto px = in.take(pixels);
        out.images.emplace_back(px.begin(), px.end());
    }
    return out;
}

IdxLabels parse_idx_labels(std::span<const std::uint8_t> bytes) {
    io::Reader in(bytes, "IDX labels");
    const std::uint32_t magic = in.u32_be();
    if (magic != kIdxLabelMagic) {
        std::ostringstream msg;
        msg << "IDX labels: bad magic, expected 0x" << std::hex << std::setw(8) << std::setfill('0') << kIdxLabelMagic
            << " got 0x" << std::setw(8) << magic;
        throw FormatError(msg.str());
    }
    const std::uint32_t count = in.u32_be();
    if (in.remaining() != count)
        throw FormatError("IDX labels: header promises " + std::to_string(count) + " labels but payload has " +
                          std::to_string(in.remaining()) + " bytes (truncated or padded)");
    auto body = in.take(count);
    return IdxLabels{std::vector<std::uint8_t>(body.begin(), body.end())};
}

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images) {
    std::vector<std::uint8_t> out;
    const std::size_t pixels = std::size_t(images.rows) * images.cols;
    out.reserve(16 + images.images.size() * pixels);
    io::put_u32_be(out, kIdxImageMagic);
    io::put_u32_be(out, static_cast<std::uint32_t>(images.images.size()));
    io::put_u32_be(out, images.rows);
    io::put_u32_be(out, images.cols);
    for (const auto& img : images.images) {
        if (img.size() != pixels) throw ContractError("IDX image has wrong pixel count");
        out.insert(out.end(), img.begin(), img.end());
    }
    return out;
}

std::vector<std::uint8_t> serialize_idx_labels(const IdxLabels& labels) {
    std::vector<std::uint8_t> out;
    io::put_u32_be(out, kIdxLabelMagic);
    io::put_u32_be(out, static_cast<std::uint32_t>(labels.labels.size()));
    out.insert(out.end(), labels.labels.begin(), labels.labels.end());
    return out;
}

IdxDataset load_idx(const std::filesystem::path& image_path, const std::filesystem::path& label_path) {
    IdxDataset ds{parse_idx_images(io::read_file(image_path)), parse_idx_labels(io::read_file(label_path))};
    if (ds.images.images.size() != ds.labels.labels.size())
        throw FormatError("IDX count mismatch: " + std::to_string(ds.images.images.size()) + " images vs " +
                          std::to_string(ds.labels.labels.size()) + " labels");
    return ds;
}

double normalize_byte(std::uint8_t v) { return static_cast<double>(v) / 127.5 - 1.0; }

std::uint8_t denormalize_value(double x) {
    const double v = std::round((x + 1.0) * 127.5);
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

Tensor normalize(std::span<const std::uint8_t> bytes) {
    Tensor t(Shape{bytes.size()});
    for (std::size_t i = 0; i < bytes.size(); ++i) t[i] = normalize_byte(bytes[i]);
    return t;
}

MulticlassDataset to_multiclass(const IdxDataset& idx, std::string source_tag) {
    MulticlassDataset out;
    out.source_tag = std::move(source_tag);
    out.feature_dim = std::size_t(idx.images.rows) * idx.images.cols;
    for (std::size_t i = 0; i < idx.images.images.size(); ++i) {
        out.instances.push_back(normalize(idx.images.images[i]));
        out.labels.push_back(idx.labels.labels.at(i));
    }
    return out;
}

Dataset filter_binary(const MulticlassDataset& dataset, int class_a, int class_b, std::vector<std::string>* warnings) {
    if (class_a == class_b) throw ConfigError("binary classes must differ", "class_b");
    Dataset out;
    out.feature_dim = dataset.feature_dim;
    out.source_tag = dataset.source_tag + ":" + std::to_string(class_a) + "v" + std::to_string(class_b);
    std::size_t seen_a = 0, seen_b = 0;
    for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
        const int y = dataset.labels[i];
        if (y != class_a && y != class_b) continue;
        (y == class_a ? seen_a : seen_b)++;
        out.instances.push_back(dataset.instances[i]);
        out.labels.push_back(y == class_a ? 1 : -1);
    }
    if (warnings) {
        if (seen_a == 0) warnings->push_back("class " + std::to_string(class_a) + " absent from " + dataset.source_tag);
        if (seen_b == 0) warnings->push_back("class " + std::to_string(class_b) + " absent from " + dataset.source_tag);
    }
    return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
    out << "label";
    for (std::size_t d = 0; d < dataset.feature_dim; ++d) out << ",f" << d;
    out << '\n';
    const auto old_precision = out.precision(17);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out << dataset.labels[i];
        for (double v : dataset.instances[i].data()) out << ',' << v;
        out << '\n';
    }
    out.precision(old_precision);
}

Dataset read_dataset_csv(std::istream& in, std::string source_tag) {
    Dataset ds;
    ds.source_tag = std::move(source_tag);
    std::string line;
    if (!std::getline(in, line) || line.rfind("label", 0) != 0) throw FormatError("dataset CSV: missing header");
    ds.feature_dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> values;
        int label = 0;
        bool first = true;
        while (std::getline(row, cell, ',')) {
            try {
                if (first)
                    label = std::stoi(cell);
                else
                    values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError("dataset CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
            first = false;
        }
        if (values.size() != ds.feature_dim)
            throw FormatError("dataset CSV line " + std::to_string(lineno) + ": expected " +
                              std::to_string(ds.feature_dim) + " features");
        ds.instances.push_back(Tensor::vector(std::move(values)));
        ds.labels.push_back(label);
    }
    ds.validate();
    return ds;
}

}  // namespace gaal
