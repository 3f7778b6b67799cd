#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaal/classifier.hpp"
#include "gaal/data.hpp"
#include "gaal/gantrain.hpp"
#include "gaal/strategy.hpp"
#include "gaal/synth.hpp"

namespace gaal {

inline constexpr int kConfigVersion = 1;

enum class OracleKind { GroundTruth, NearestNeighbor, Human };

std::string_view oracle_kind_name(OracleKind kind);
OracleKind parse_oracle_kind(std::string_view name);

struct DatasetSpec {
    std::string kind = "two_gaussians";  // two_gaussians | idx | csv

    // two_gaussians
    std::size_t pool_size = 2000;
    std::size_t test_size = 1000;
    std::vector<double> mean_pos{0.5, 0.0};
    std::vector<double> mean_neg{-0.5, 0.0};
    double sigma = 0.075;
    std::uint64_t seed = 7;
    ShiftSpec shift;  // applied to the test set only

    // idx
    std::string train_images, train_labels, test_images, test_labels;
    int class_a = 5;
    int class_b = 7;
    std::size_t pool_limit = 0;  // 0 keeps every filtered instance
    std::size_t test_limit = 0;

    // csv
    std::string train_csv, test_csv;

    bool operator==(const DatasetSpec&) const;
};

struct ExperimentConfig {
    StrategyKind strategy = StrategyKind::Gaal;
    std::vector<StrategyKind> compare_strategies{StrategyKind::Gaal, StrategyKind::SimpleGan, StrategyKind::SvmActive,
                                                 StrategyKind::Random};
    std::size_t init_size = 50;
    std::size_t batch_size = 10;
    std::size_t budget = 100;  // oracle interactions, initialization included
    OracleKind oracle = OracleKind::GroundTruth;
    std::optional<double> skip_radius;  // nearest-neighbor oracle; unset picks the data-driven default
    DatasetSpec dataset;
    GanConfig gan;
    std::string gan_checkpoint;  // load instead of training when set
    SvmConfig svm;
    SynthConfig synth;
    std::vector<std::uint64_t> seeds{0};
    bool dump_queries = false;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Parses the flat `key = value` format. `#` starts a comment; blank lines are
/// ignored; `config_version=1` is required; unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_pairs(const std::map<std::string, std::string>& pairs);
/// Inverse of parse_config: every field, one key per line.
std::string render_config(const ExperimentConfig& config);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace gaal
