#include "gaal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "gaal/binary_io.hpp"
#include "gaal/errors.hpp"
#include "gaal/gantrain.hpp"
#include "gaal/image.hpp"

namespace gaal {

namespace {

constexpr std::size_t kSkipRadiusProbes = 1000;

Dataset truncate(Dataset ds, std::size_t limit) {
    if (limit > 0 && ds.size() > limit) {
        ds.instances.resize(limit);
        ds.labels.resize(limit);
    }
    return ds;
}

Dataset load_idx_binary(const std::string& images, const std::string& labels, const DatasetSpec& spec,
                        std::size_t limit, const char* field) {
    if (images.empty() || labels.empty()) throw ConfigError(std::string("idx dataset needs ") + field + " paths", field);
    auto multi = to_multiclass(load_idx(images, labels));
    return truncate(filter_binary(multi, spec.class_a, spec.class_b), limit);
}

Dataset read_csv_file(const std::string& path, const char* field) {
    if (path.empty()) throw ConfigError(std::string("csv dataset needs ") + field, field);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path, field);
    return read_dataset_csv(in);
}

Dataset shifted(Dataset ds, const DatasetSpec& spec) {
    if (spec.shift.is_identity()) return ds;
    return apply_shift(ds, spec.shift, Rng(spec.seed).split("shift").next_u64());
}

LinearClassifier train_or_default(const LabeledSet& s, const SvmConfig& svm, std::size_t dim) {
    if (s.empty()) return LinearClassifier(Tensor(Shape{dim}, 0.0), 1.0);
    return svm_train(s, svm);
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

Dataset load_pool(const DatasetSpec& spec) {
    if (spec.kind == "two_gaussians")
        return make_two_gaussians(spec.pool_size, spec.mean_pos, spec.mean_neg, spec.sigma,
                                  Rng(spec.seed).split("pool").next_u64());
    if (spec.kind == "idx") return load_idx_binary(spec.train_images, spec.train_labels, spec, spec.pool_limit, "train_images");
    if (spec.kind == "csv") return read_csv_file(spec.train_csv, "train_csv");
    throw ConfigError("unknown dataset kind '" + spec.kind + "'", "dataset");
}

Dataset load_test_set(const DatasetSpec& spec) {
    if (spec.kind == "two_gaussians")
        return shifted(make_two_gaussians(spec.test_size, spec.mean_pos, spec.mean_neg, spec.sigma,
                                          Rng(spec.seed).split("test").next_u64()),
                       spec);
    if (spec.kind == "idx")
        return shifted(load_idx_binary(spec.test_images, spec.test_labels, spec, spec.test_limit, "test_images"), spec);
    if (spec.kind == "csv") return shifted(read_csv_file(spec.test_csv, "test_csv"), spec);
    throw ConfigError("unknown dataset kind '" + spec.kind + "'", "dataset");
}

Oracle make_oracle(const ExperimentConfig& config, const Dataset& pool) {
    switch (config.oracle) {
        case OracleKind::GroundTruth:
            if (config.dataset.kind != "two_gaussians")
                throw ConfigError("ground_truth oracle needs a known labeling function; use nearest_neighbor or human",
                                  "oracle");
            return GroundTruthOracle{bisector_labeler(config.dataset.mean_pos, config.dataset.mean_neg)};
        case OracleKind::NearestNeighbor: {
            auto reference = LabeledSet::from(pool);
            const double tau = config.skip_radius ? *config.skip_radius
                                                  : default_skip_radius(reference, 0.95, kSkipRadiusProbes);
            return NearestNeighborOracle{std::move(reference), tau};
        }
        case OracleKind::Human:
            return HumanOracle{};
    }
    throw ConfigError("unknown oracle", "oracle");
}

bool needs_generator(const ExperimentConfig& config) {
    if (is_synthesis(config.strategy) || config.strategy == StrategyKind::Mixed) return true;
    return std::any_of(config.compare_strategies.begin(), config.compare_strategies.end(),
                       [](StrategyKind k) { return is_synthesis(k) || k == StrategyKind::Mixed; });
}

Experiment prepare_experiment(const ExperimentConfig& config, bool need_generator) {
    config.validate();
    Experiment exp;
    exp.pool = load_pool(config.dataset);
    exp.test = load_test_set(config.dataset);
    exp.pool.validate();
    exp.test.validate();
    if (exp.pool.feature_dim != exp.test.feature_dim)
        throw ConfigError("pool and test feature dimensions differ", "dataset");
    if (exp.pool.size() < config.init_size)
        throw ConfigError("pool smaller than init_size", "init_size");
    exp.oracle = make_oracle(config, exp.pool);
    if (need_generator) {
        if (!config.gan_checkpoint.empty()) {
            GeneratorNet g(load_network(config.gan_checkpoint));
            if (g.output_dim() != exp.pool.feature_dim)
                throw ConfigError("generator output dimension does not match the data", "gan_checkpoint");
            exp.generator = std::move(g);
        } else {
            auto result = train_gan(exp.pool.as_matrix(), config.gan);
            exp.generator = std::move(result.generator);
            exp.gan_history = std::move(result.history);
            ++exp.gan_trainings;
        }
    }
    return exp;
}

StrategyKind strategy_at(StrategyKind configured, std::size_t iteration) {
    return configured == StrategyKind::Mixed ? mixed_schedule(iteration) : configured;
}

QueryBatch acquire_batch(StrategyKind kind, const ExperimentConfig& config, const Experiment& experiment,
                         const LinearClassifier& clf, Pool& pool, Rng& pool_rng, const Rng& synth_rng,
                         std::size_t iteration, std::size_t k) {
    QueryBatch batch;
    switch (kind) {
        case StrategyKind::Random:
            batch = select_random(pool, k, pool_rng);
            break;
        case StrategyKind::SvmActive:
            if (pool.available_count() > 0) batch = select_svm_active(clf, pool, k);
            break;
        case StrategyKind::SimpleGan:
            if (!experiment.generator) throw ContractError("simple_gan needs a generator");
            batch = select_simple_gan(*experiment.generator, k, synth_rng.split(iteration).next_u64());
            break;
        case StrategyKind::Gaal: {
            if (!experiment.generator) throw ContractError("gaal needs a generator");
            SynthConfig sc = config.synth;
            sc.seed = synth_rng.split(iteration).next_u64();
            batch = select_gaal(clf, *experiment.generator, k, sc);
            break;
        }
        default:
            throw ContractError("strategy " + std::string(strategy_name(kind)) + " cannot acquire a batch");
    }
    batch.strategy = kind;
    batch.iteration = iteration;
    if (batch.items.size() < k) batch.truncated = true;
    return batch;
}

RunResult run_active_learning(const ExperimentConfig& config, const Experiment& experiment, std::uint64_t seed) {
    config.validate();
    const Oracle& oracle = experiment.oracle;
    if (!is_programmatic(oracle)) throw ConfigError("batch runs need a programmatic oracle", "oracle");
    const std::size_t dim = experiment.pool.feature_dim;

    RunResult result;
    result.curve.seed = seed;
    result.curve.strategy = config.strategy;
    LabeledSet labeled;

    if (config.strategy == StrategyKind::Supervised) {
        for (const auto& x : experiment.pool.instances) {
            const Verdict v = ask(oracle, x.data());
            if (is_skip(v))
                ++result.skipped;
            else
                labeled.add(x, verdict_label(v));
        }
        result.classifier = train_or_default(labeled, config.svm, dim);
        result.budget = experiment.pool.size();
        result.labeled = labeled.size();
        result.oracle_calls = result.labeled + result.skipped;
        if (!labeled.empty()) result.curve.points.push_back({labeled.size(), accuracy(result.classifier, experiment.test)});
        return result;
    }

    const bool uses_generator = is_synthesis(config.strategy) || config.strategy == StrategyKind::Mixed;
    if (uses_generator && !experiment.generator)
        throw ContractError("strategy " + std::string(strategy_name(config.strategy)) + " needs a generator");

    Rng root(seed);
    Rng pool_rng = root.split("pool-selection");
    Rng synth_rng = root.split("synthesis");
    Pool pool = Pool::from(experiment.pool);
    result.budget = config.budget;
    std::size_t remaining = config.budget;

    auto label_batch = [&](const QueryBatch& batch, bool record) {
        std::size_t added = 0;
        for (const auto& item : batch.items) {
            const Verdict v = ask(oracle, item.x.data());
            --remaining;
            if (is_skip(v)) {
                ++result.skipped;
            } else {
                labeled.add(item.x, verdict_label(v));
                ++added;
            }
            if (record)
                result.queries.push_back({batch.iteration, batch.strategy, item.x, item.pool_index, item.objective,
                                          item.restart, v});
        }
        return added;
    };

    label_batch(select_random(pool, config.init_size, pool_rng), false);
    result.classifier = train_or_default(labeled, config.svm, dim);
    if (!labeled.empty())
        result.curve.points.push_back({labeled.size(), accuracy(result.classifier, experiment.test)});

    for (std::size_t iteration = 0; remaining > 0; ++iteration) {
        const std::size_t k = std::min(config.batch_size, remaining);
        const StrategyKind kind = strategy_at(config.strategy, iteration);
        QueryBatch batch = acquire_batch(kind, config, experiment, result.classifier, pool, pool_rng, synth_rng,
                                         iteration, k);
        if (batch.items.empty()) break;  // pool exhausted

        if (label_batch(batch, true) > 0) {
            result.classifier = train_or_default(labeled, config.svm, dim);
            result.curve.points.push_back({labeled.size(), accuracy(result.classifier, experiment.test)});
        }
        if (batch.truncated) break;
    }

    result.labeled = labeled.size();
    result.remaining = remaining;
    result.oracle_calls = result.labeled + result.skipped;
    return result;
}

CurveSummary summarize_curves(const std::vector<LearningCurve>& curves) {
    CurveSummary summary;
    if (curves.empty()) return summary;
    summary.strategy = curves.front().strategy;

    std::set<std::size_t> common;
    for (const auto& p : curves.front().points) common.insert(p.labeled_count);
    for (std::size_t c = 1; c < curves.size(); ++c) {
        std::set<std::size_t> here;
        for (const auto& p : curves[c].points) here.insert(p.labeled_count);
        std::set<std::size_t> both;
        std::set_intersection(common.begin(), common.end(), here.begin(), here.end(), std::inserter(both, both.end()));
        common = std::move(both);
    }
    for (const auto& curve : curves)
        for (const auto& p : curve.points)
            if (!common.contains(p.labeled_count)) summary.misaligned = true;

    for (std::size_t count : common) {
        std::vector<double> acc;
        for (const auto& curve : curves)
            for (const auto& p : curve.points)
                if (p.labeled_count == count) {
                    acc.push_back(p.accuracy);
                    break;
                }
        const double n = static_cast<double>(acc.size());
        double mean = 0.0;
        for (double a : acc) mean += a;
        mean /= n;
        double se = 0.0;
        if (acc.size() > 1) {
            double ss = 0.0;
            for (double a : acc) ss += (a - mean) * (a - mean);
            se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        }
        summary.points.push_back({count, mean, se, acc.size()});
    }
    return summary;
}

ReplicatedResult run_replicated(const ExperimentConfig& config, const Experiment& experiment) {
    const std::size_t n = config.seeds.size();
    ReplicatedResult out;
    out.runs.resize(n);
    std::vector<std::exception_ptr> errors(n);
    const std::size_t width = std::max<std::size_t>(1, std::thread::hardware_concurrency());

    for (std::size_t start = 0; start < n; start += width) {
        std::vector<std::thread> workers;
        for (std::size_t i = start; i < std::min(n, start + width); ++i) {
            workers.emplace_back([&, i] {
                try {
                    out.runs[i] = run_active_learning(config, experiment, config.seeds[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<LearningCurve> curves;
    for (const auto& r : out.runs) curves.push_back(r.curve);
    out.summary = summarize_curves(curves);
    out.summary.strategy = config.strategy;
    return out;
}

std::vector<ExperimentConfig> expand_comparison(const ExperimentConfig& config) {
    std::vector<ExperimentConfig> out;
    for (StrategyKind kind : config.compare_strategies) {
        ExperimentConfig c = config;
        c.strategy = kind;
        out.push_back(std::move(c));
    }
    return out;
}

Comparison compare_strategies(const std::vector<ExperimentConfig>& configs, const Experiment& experiment) {
    if (configs.empty()) throw ConfigError("nothing to compare", "compare_strategies");
    for (const auto& c : configs) {
        if (!(c.dataset == configs.front().dataset))
            throw ConfigError("compared strategies must share one dataset", "dataset");
        if (c.seeds != configs.front().seeds) throw ConfigError("compared strategies must share seeds", "seeds");
    }
    Comparison cmp;
    for (const auto& c : configs) {
        auto rep = run_replicated(c, experiment);
        std::vector<LearningCurve> curves;
        for (auto& r : rep.runs) curves.push_back(std::move(r.curve));
        cmp.summaries.push_back(std::move(rep.summary));
        cmp.curves.push_back(std::move(curves));
    }
    ExperimentConfig sup = configs.front();
    sup.strategy = StrategyKind::Supervised;
    const auto full = run_active_learning(sup, experiment, sup.seeds.front());
    if (!full.curve.points.empty()) cmp.supervised_accuracy = full.curve.points.front().accuracy;
    cmp.supervised_labeled = full.labeled;
    return cmp;
}

void write_curve_csv(std::ostream& out, const LearningCurve& curve) {
    out << "labeled_count,accuracy\n";
    for (const auto& p : curve.points) out << p.labeled_count << ',' << format_double(p.accuracy) << '\n';
}

void write_summary_csv(std::ostream& out, const CurveSummary& summary) {
    out << "labeled_count,mean_accuracy,std_err\n";
    for (const auto& p : summary.points)
        out << p.labeled_count << ',' << format_double(p.mean_accuracy) << ',' << format_double(p.std_err) << '\n';
}

namespace {

bool plotted(const CurveSummary& s) { return s.strategy != StrategyKind::Supervised; }

std::vector<std::size_t> plotted_counts(const Comparison& cmp) {
    std::set<std::size_t> counts;
    for (const auto& s : cmp.summaries)
        if (plotted(s))
            for (const auto& p : s.points) counts.insert(p.labeled_count);
    return {counts.begin(), counts.end()};
}

}  // namespace

void write_comparison_csv(std::ostream& out, const Comparison& cmp) {
    out << "strategy,labeled_count,mean_accuracy,std_err\n";
    for (const auto& s : cmp.summaries)
        for (const auto& p : s.points)
            out << strategy_name(s.strategy) << ',' << p.labeled_count << ',' << format_double(p.mean_accuracy) << ','
                << format_double(p.std_err) << '\n';
    for (std::size_t count : plotted_counts(cmp))
        out << "supervised_baseline," << count << ',' << format_double(cmp.supervised_accuracy) << ",0\n";
}

double PlotFrame::to_x(double labeled) const {
    const double span = width - left - right;
    if (x_max <= x_min) return left + span / 2.0;
    return left + (labeled - x_min) / (x_max - x_min) * span;
}

double PlotFrame::to_y(double acc) const {
    const double span = height - top - bottom;
    if (y_max <= y_min) return top + span / 2.0;
    return top + (y_max - acc) / (y_max - y_min) * span;
}

PlotFrame comparison_frame(const Comparison& cmp) {
    PlotFrame f;
    const auto counts = plotted_counts(cmp);
    if (!counts.empty()) {
        f.x_min = static_cast<double>(counts.front());
        f.x_max = static_cast<double>(counts.back());
    }
    double lo = cmp.supervised_accuracy, hi = cmp.supervised_accuracy;
    for (const auto& s : cmp.summaries)
        if (plotted(s))
            for (const auto& p : s.points) {
                lo = std::min(lo, p.mean_accuracy - p.std_err);
                hi = std::max(hi, p.mean_accuracy + p.std_err);
            }
    f.y_min = std::max(0.0, lo - 0.02);
    f.y_max = std::min(1.0, hi + 0.02);
    if (f.y_max - f.y_min < 0.05) {
        f.y_min = std::max(0.0, f.y_max - 0.05);
        f.y_max = f.y_min + 0.05;
    }
    return f;
}

std::string render_comparison_svg(const Comparison& cmp) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    const PlotFrame f = comparison_frame(cmp);
    const double x0 = f.left, x1 = f.width - f.right, y0 = f.top, y1 = f.height - f.bottom;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
        << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y1 << "\" x2=\"" << x1 << "\" y2=\"" << y1
        << "\" stroke=\"black\"/>\n";
    svg << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
        << "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double acc = f.y_min + (f.y_max - f.y_min) * i / 4.0;
        svg << "<text x=\"" << x0 - 6 << "\" y=\"" << fixed2(f.to_y(acc) + 4) << "\" text-anchor=\"end\">"
            << fixed2(acc) << "</text>\n";
    }
    for (std::size_t count : plotted_counts(cmp)) {
        svg << "<text x=\"" << fixed2(f.to_x(static_cast<double>(count))) << "\" y=\"" << y1 + 16
            << "\" text-anchor=\"middle\">" << count << "</text>\n";
    }
    svg << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << f.height - 10
        << "\" text-anchor=\"middle\">labeled instances</text>\n";
    svg << "<text transform=\"translate(16," << (y0 + y1) / 2
        << ") rotate(-90)\" text-anchor=\"middle\">test accuracy</text>\n";

    std::size_t slot = 0;
    for (const auto& s : cmp.summaries) {
        if (!plotted(s)) continue;
        const char* color = palette[slot % std::size(palette)];
        const std::string name(strategy_name(s.strategy));
        svg << "<polyline class=\"curve curve-" << name << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"";
        for (const auto& p : s.points)
            svg << fixed2(f.to_x(static_cast<double>(p.labeled_count))) << ',' << fixed2(f.to_y(p.mean_accuracy)) << ' ';
        svg << "\"/>\n";
        for (const auto& p : s.points) {
            if (p.std_err <= 0.0) continue;
            const double x = f.to_x(static_cast<double>(p.labeled_count));
            svg << "<line class=\"error-bar\" x1=\"" << fixed2(x) << "\" y1=\""
                << fixed2(f.to_y(p.mean_accuracy - p.std_err)) << "\" x2=\"" << fixed2(x) << "\" y2=\""
                << fixed2(f.to_y(p.mean_accuracy + p.std_err)) << "\" stroke=\"" << color << "\"/>\n";
        }
        const double ly = y0 + 14.0 + 18.0 * static_cast<double>(slot);
        svg << "<line x1=\"" << x1 + 12 << "\" y1=\"" << ly << "\" x2=\"" << x1 + 36 << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << x1 + 42 << "\" y=\"" << ly + 4 << "\">" << name << "</text>\n";
        ++slot;
    }

    const double by = f.to_y(cmp.supervised_accuracy);
    svg << "<line class=\"supervised-baseline\" x1=\"" << fixed2(x0) << "\" y1=\"" << fixed2(by) << "\" x2=\""
        << fixed2(x1) << "\" y2=\"" << fixed2(by) << "\" stroke=\"#444\" stroke-dasharray=\"6 4\"/>\n";
    const double ly = y0 + 14.0 + 18.0 * static_cast<double>(slot);
    svg << "<line x1=\"" << x1 + 12 << "\" y1=\"" << ly << "\" x2=\"" << x1 + 36 << "\" y2=\"" << ly
        << "\" stroke=\"#444\" stroke-dasharray=\"6 4\"/>\n";
    svg << "<text x=\"" << x1 + 42 << "\" y=\"" << ly + 4 << "\">supervised (" << fixed2(cmp.supervised_accuracy)
        << ")</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void dump_query_batch(const std::filesystem::path& dir, const std::vector<QueryRecord>& queries) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.csv");
    if (!manifest) throw Error("cannot write " + (dir / "manifest.csv").string());
    manifest << "query_id,restart,objective\n";
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& q = queries[i];
        const std::string id = "q" + std::to_string(i);
        const auto gray = to_gray_bytes(q.x);
        const auto pgm = encode_pgm(gray, image_shape_for(q.x.numel()));
        io::write_file(dir / (id + ".pgm"), pgm);
        manifest << id << ',' << (q.restart ? std::to_string(*q.restart) : std::string()) << ','
                 << (q.objective ? format_double(*q.objective) : std::string()) << '\n';
    }
}

}  // namespace gaal
