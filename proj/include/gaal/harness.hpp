#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gaal/classifier.hpp"
#include "gaal/config.hpp"
#include "gaal/data.hpp"
#include "gaal/nets.hpp"
#include "gaal/oracle.hpp"
#include "gaal/strategy.hpp"

namespace gaal {

struct CurvePoint {
    std::size_t labeled_count = 0;
    double accuracy = 0.0;

    bool operator==(const CurvePoint&) const = default;
};

struct LearningCurve {
    std::vector<CurvePoint> points;
    std::uint64_t seed = 0;
    StrategyKind strategy = StrategyKind::Random;
};

struct SummaryPoint {
    std::size_t labeled_count = 0;
    double mean_accuracy = 0.0;
    double std_err = 0.0;  // sample standard deviation / sqrt(runs)
    std::size_t runs = 0;
};

struct CurveSummary {
    StrategyKind strategy = StrategyKind::Random;
    std::vector<SummaryPoint> points;
    bool misaligned = false;  // some labeled counts were dropped to align the curves
};

/// Datasets, oracle and (when a synthesis strategy needs it) the generator for
/// one experiment. The generator is trained at most once, in prepare_experiment.
struct Experiment {
    Dataset pool;
    Dataset test;
    Oracle oracle;
    std::optional<GeneratorNet> generator;
    std::vector<EpochLoss> gan_history;
    std::size_t gan_trainings = 0;
    std::vector<std::string> warnings;
};

Dataset load_pool(const DatasetSpec& spec);
Dataset load_test_set(const DatasetSpec& spec);
Oracle make_oracle(const ExperimentConfig& config, const Dataset& pool);
/// Loads data and builds the oracle. When `need_generator` is set the generator
/// is loaded from config.gan_checkpoint or trained on the pool instances.
Experiment prepare_experiment(const ExperimentConfig& config, bool need_generator);
bool needs_generator(const ExperimentConfig& config);

struct QueryRecord {
    std::size_t iteration = 0;
    StrategyKind strategy = StrategyKind::Random;
    Tensor x;
    std::optional<std::size_t> pool_index;
    std::optional<double> objective;
    std::optional<std::size_t> restart;
    Verdict verdict = Verdict::Skip;
};

struct RunResult {
    LearningCurve curve;
    LinearClassifier classifier;
    std::size_t budget = 0;
    std::size_t labeled = 0;   // instances in S, initialization included
    std::size_t skipped = 0;
    std::size_t remaining = 0;
    std::size_t oracle_calls = 0;
    std::vector<QueryRecord> queries;  // every post-initialization query
};

/// Step 5 of the loop for one iteration: k queries from `kind` (never Mixed or
/// Supervised). Pool strategies draw from `pool_rng`; synthesis strategies
/// derive their seed from `synth_rng` and the iteration. Empty when the pool
/// is exhausted.
QueryBatch acquire_batch(StrategyKind kind, const ExperimentConfig& config, const Experiment& experiment,
                         const LinearClassifier& clf, Pool& pool, Rng& pool_rng, const Rng& synth_rng,
                         std::size_t iteration, std::size_t k);

/// Strategy actually used at `iteration` (resolves the mixed schedule).
StrategyKind strategy_at(StrategyKind configured, std::size_t iteration);

/// One active-learning session: label init_size random pool instances, then
/// query / label / retrain until the budget is spent. Deterministic per seed.
RunResult run_active_learning(const ExperimentConfig& config, const Experiment& experiment, std::uint64_t seed);

/// Mean and standard error over aligned labeled counts.
CurveSummary summarize_curves(const std::vector<LearningCurve>& curves);

struct ReplicatedResult {
    std::vector<RunResult> runs;
    CurveSummary summary;
};

/// One run per config seed. Seeds run on separate threads; results keep seed order.
ReplicatedResult run_replicated(const ExperimentConfig& config, const Experiment& experiment);

struct Comparison {
    std::vector<CurveSummary> summaries;
    std::vector<std::vector<LearningCurve>> curves;  // per strategy, per seed
    double supervised_accuracy = 0.0;
    std::size_t supervised_labeled = 0;
};

/// Runs each config (same dataset and seeds) on the shared experiment plus the
/// fully supervised baseline. Throws ConfigError when datasets or seeds differ.
Comparison compare_strategies(const std::vector<ExperimentConfig>& configs, const Experiment& experiment);
/// One config per entry of config.compare_strategies.
std::vector<ExperimentConfig> expand_comparison(const ExperimentConfig& config);

void write_curve_csv(std::ostream& out, const LearningCurve& curve);
void write_summary_csv(std::ostream& out, const CurveSummary& summary);
/// Rows strategy,labeled_count,mean_accuracy,std_err; the supervised baseline
/// appears as a constant series spanning the plotted labeled-count range.
void write_comparison_csv(std::ostream& out, const Comparison& comparison);

/// Maps data coordinates onto the SVG canvas of render_comparison_svg.
struct PlotFrame {
    double width = 720, height = 440;
    double left = 70, right = 170, top = 30, bottom = 50;
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

    double to_x(double labeled) const;
    double to_y(double accuracy) const;
};

PlotFrame comparison_frame(const Comparison& comparison);
/// Accuracy-vs-labels chart: one polyline with error bars per strategy and a
/// dashed horizontal `supervised-baseline` line at the supervised accuracy.
std::string render_comparison_svg(const Comparison& comparison);

/// PGM images plus manifest.csv (query_id,restart,objective) for synthesized queries.
void dump_query_batch(const std::filesystem::path& dir, const std::vector<QueryRecord>& queries);

}  // namespace gaal
