// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gaal/autodiff.hpp"
#include "gaal/binary_io.hpp"
#include "gaal/classifier.hpp"
#include "gaal/config.hpp"
#include "gaal/data.hpp"
#include "gaal/gantrain.hpp"
#include "gaal/harness.hpp"
#include "gaal/labsrv.hpp"
#include "gaal/rng.hpp"
#include "gaal/strategy.hpp"
#include "gaal/synth.hpp"

using namespace gaal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    double time_limit_s;  // 0 means no limit
    std::function<Outcome()> run;
};

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

/// |a - n| / max(|a|, |n|, floor). The floor keeps vanishing components,
/// where central differences carry only rounding noise, from dominating.
double rel_err(double a, double n, double floor = 1e-6) {
    return std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), floor});
}

Tensor random_tensor(Shape shape, Rng& rng, double lo, double hi) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

// ---------------------------------------------------------------- gradients

enum class Act { Tanh, Sigmoid, Leaky, Relu, Square, Exp, Abs };

struct RandomGraph {
    std::size_t batch = 1;
    std::vector<std::size_t> dims;  // input dim then one entry per layer
    std::vector<Act> acts;
    std::vector<bool> use_matmul;
    bool gate = false;    // multiply the last layer by an extra leaf
    int reduction = 0;    // 0 sum, 1 mean, 2 bce on sigmoid
    Tensor targets;
    std::vector<Tensor> leaves;  // x, then per layer weight (and bias), then gate
};

RandomGraph make_graph(Rng& rng) {
    RandomGraph g;
    g.batch = 1 + rng.below(4);
    const std::size_t depth = 1 + rng.below(3);
    g.dims.push_back(1 + rng.below(16));
    g.leaves.push_back(random_tensor({g.batch, g.dims[0]}, rng, -1, 1));
    for (std::size_t l = 0; l < depth; ++l) {
        const std::size_t in = g.dims.back(), out = 1 + rng.below(16);
        g.dims.push_back(out);
        g.acts.push_back(static_cast<Act>(rng.below(7)));
        g.use_matmul.push_back(rng.below(2) == 0);
        const double s = 1.0 / std::sqrt(static_cast<double>(in));
        if (g.use_matmul.back()) {
            g.leaves.push_back(random_tensor({in, out}, rng, -s, s));
        } else {
            g.leaves.push_back(random_tensor({out, in}, rng, -s, s));
            g.leaves.push_back(random_tensor({out}, rng, -0.5, 0.5));
        }
    }
    g.gate = rng.below(2) == 0;
    if (g.gate) g.leaves.push_back(random_tensor({g.batch, g.dims.back()}, rng, -1, 1));
    g.reduction = static_cast<int>(rng.below(3));
    g.targets = Tensor({g.batch, g.dims.back()});
    for (auto& v : g.targets.data()) v = static_cast<double>(rng.below(2));
    return g;
}

/// Evaluates the graph on a fresh tape. `kink` receives the smallest
/// distance of any relu/leaky/abs input from its nondifferentiable point.
double eval_graph(const RandomGraph& g, const std::vector<Tensor>& leaves, ad::Tape& tape, std::vector<ad::Var>& vars,
                  double* kink) {
    vars.clear();
    for (const auto& t : leaves) vars.push_back(tape.leaf(t));
    std::size_t next = 0;
    ad::Var h = vars[next++];
    for (std::size_t l = 0; l < g.acts.size(); ++l) {
        if (g.use_matmul[l]) {
            h = ad::matmul(h, vars[next++]);
        } else {
            const ad::Var w = vars[next++], b = vars[next++];
            h = ad::affine(h, w, b);
        }
        if (kink && (g.acts[l] == Act::Relu || g.acts[l] == Act::Leaky || g.acts[l] == Act::Abs))
            for (double v : h.value().values()) *kink = std::min(*kink, std::fabs(v));
        switch (g.acts[l]) {
            case Act::Tanh: h = ad::tanh(h); break;
            case Act::Sigmoid: h = ad::sigmoid(h); break;
            case Act::Leaky: h = ad::leaky_relu(h); break;
            case Act::Relu: h = ad::relu(h); break;
            case Act::Square: h = ad::square(h); break;
            case Act::Exp: h = ad::exp(ad::scale(h, 0.5)); break;
            case Act::Abs: h = ad::abs(h); break;
        }
    }
    if (g.gate) h = ad::mul(h, vars[next++]);
    ad::Var loss;
    switch (g.reduction) {
        case 0: loss = ad::sum(h); break;
        case 1: loss = ad::mean(ad::sub(h, ad::scale(h, 0.25))); break;
        default: loss = ad::binary_cross_entropy(ad::sigmoid(h), g.targets); break;
    }
    return loss.value()[0];
}

Outcome gradient_correctness() {
    Rng rng(20240601);
    double worst = 0.0;
    std::size_t graphs = 0, resampled = 0;
    while (graphs < 50) {
        RandomGraph g = make_graph(rng);
        ad::Tape tape;
        std::vector<ad::Var> vars;
        double kink = std::numeric_limits<double>::infinity();
        eval_graph(g, g.leaves, tape, vars, &kink);
        if (kink < 1e-3) {
            ++resampled;
            continue;
        }
        tape.backward(ad::Var{&tape, tape.size() - 1});
        const double h = 1e-5;
        for (std::size_t li = 0; li < g.leaves.size(); ++li) {
            const Tensor analytic = tape.grad(vars[li]);
            for (std::size_t e = 0; e < g.leaves[li].numel(); ++e) {
                auto plus = g.leaves, minus = g.leaves;
                plus[li].data()[e] += h;
                minus[li].data()[e] -= h;
                ad::Tape tp, tm;
                std::vector<ad::Var> vp, vm;
                const double fd = (eval_graph(g, plus, tp, vp, nullptr) - eval_graph(g, minus, tm, vm, nullptr)) / (2 * h);
                worst = std::max(worst, rel_err(analytic[e], fd));
            }
        }
        ++graphs;
    }
    return {worst < 1e-4, "max rel err " + fmt("%.2e", worst) + " over 50 graphs (" + std::to_string(resampled) +
                              " resampled near a kink)"};
}

Outcome gaal_gradient_correctness() {
    Rng rng(77);
    double worst = 0.0;
    std::size_t triples = 0;
    while (triples < 100) {
        const std::size_t latent = 1 + rng.below(16), out = 1 + rng.below(16);
        std::vector<std::size_t> hidden;
        for (std::size_t l = 0, n = rng.below(3); l < n; ++l) hidden.push_back(1 + rng.below(16));
        GeneratorNet g = GeneratorNet::create(latent, hidden, out, rng.next_u64());
        // Default initialization is nearly linear; widen it so tanh bends.
        const double widen = rng.uniform(10, 50);
        for (auto& t : g.net().params())
            for (auto& v : t.data()) v *= widen;
        const LinearClassifier clf(random_tensor({out}, rng, -1, 1), rng.uniform(-0.5, 0.5));
        const Tensor z = random_tensor({latent}, rng, -1, 1);
        if (gaal_objective(clf, g, z) < 1e-3) continue;
        const Tensor grad = gaal_gradient(clf, g, z);
        const double h = 1e-5;
        for (std::size_t i = 0; i < latent; ++i) {
            Tensor zp = z, zm = z;
            zp.data()[i] += h;
            zm.data()[i] -= h;
            const double fd = (gaal_objective(clf, g, zp) - gaal_objective(clf, g, zm)) / (2 * h);
            worst = std::max(worst, rel_err(grad[i], fd));
        }
        ++triples;
    }
    return {worst < 1e-4, "max rel err " + fmt("%.2e", worst) + " over 100 triples"};
}

// ---------------------------------------------------------------- svm

/// Exact 1-D optimum: for fixed w the objective is convex piecewise linear in
/// b with kinks at b = y_i - w x_i, so the inner minimum is at a kink. The
/// outer function of w is convex; a dense grid then a ternary search finds it.
double oracle_optimum_1d(const LabeledSet& s, double lambda) {
    const auto objective = [&](double w, double b) {
        double hinge = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i)
            hinge += std::max(0.0, 1.0 - s.labels[i] * (w * s.instances[i][0] + b));
        return 0.5 * lambda * w * w + hinge / static_cast<double>(s.size());
    };
    const auto inner = [&](double w) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < s.size(); ++i) best = std::min(best, objective(w, s.labels[i] - w * s.instances[i][0]));
        return best;
    };
    const double w_max = std::sqrt(2.0 / lambda) + 1.0;  // objective(0, 0) = 1 bounds lambda w^2 / 2
    const double step = 1e-3;
    double best_w = 0.0, best = inner(0.0);
    for (double w = -w_max; w <= w_max; w += step) {
        const double v = inner(w);
        if (v < best) {
            best = v;
            best_w = w;
        }
    }
    double lo = best_w - step, hi = best_w + step;
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        (inner(m1) < inner(m2) ? hi : lo) = inner(m1) < inner(m2) ? m2 : m1;
    }
    return std::min(best, inner((lo + hi) / 2));
}

LabeledSet separable_blobs(std::size_t n, Rng& rng) {
    LabeledSet s;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i % 2 == 0 ? 1 : -1;
        s.add(Tensor::vector({y * rng.uniform(1.0, 3.0), rng.uniform(-2, 2)}), y);
    }
    return s;
}

Outcome svm_equivalence() {
    Rng rng(5150);
    double worst = 0.0;
    const double lambdas[] = {0.001, 0.01, 0.1};
    for (int p = 0; p < 20; ++p) {
        LabeledSet s;
        const std::size_t n = 3 + rng.below(6);
        for (std::size_t i = 0; i < n; ++i) s.add(Tensor::vector({rng.uniform(-1, 1)}), i < 2 ? (i == 0 ? 1 : -1) : (rng.below(2) ? 1 : -1));
        SvmConfig cfg;
        cfg.lambda = lambdas[p % 3];
        const double got = svm_objective(svm_train(s, cfg), s, cfg.lambda);
        worst = std::max(worst, std::fabs(got - oracle_optimum_1d(s, cfg.lambda)));
    }
    bool separated = true;
    for (int b = 0; b < 3; ++b) {
        const LabeledSet blobs = separable_blobs(200, rng);
        separated = separated && accuracy(svm_train(blobs), blobs) == 1.0;
    }
    return {worst < 1e-3 && separated,
            "max |objective gap| " + fmt("%.2e", worst) + " over 20 problems, blobs " + (separated ? "separated" : "NOT separated")};
}

// ---------------------------------------------------------------- pool selection

Outcome pool_selection_equivalence() {
    Rng rng(31337);
    std::size_t mismatches = 0, ties = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t size = 1 + rng.below(10000), dim = 1 + rng.below(10);
        const bool coarse = trial % 4 == 0;  // quantized coordinates produce exact ties
        std::vector<Tensor> xs;
        for (std::size_t i = 0; i < size; ++i) {
            Tensor x({dim});
            for (auto& v : x.data()) v = coarse ? std::round(rng.uniform(-1, 1) * 4) / 4 : rng.uniform(-1, 1);
            xs.push_back(std::move(x));
        }
        const LinearClassifier clf(random_tensor({dim}, rng, -1, 1), rng.uniform(-0.3, 0.3));
        Pool pool(xs);
        for (std::size_t i = 0; i < size / 10; ++i) {
            const std::size_t j = rng.below(size);
            if (pool.available(j)) pool.take(j);
        }
        if (pool.available_count() == 0) continue;
        const std::size_t k = 1 + rng.below(std::min<std::size_t>(pool.available_count() + 5, 200));

        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < size; ++i)
            if (pool.available(i)) order.push_back(i);
        std::vector<double> margin(size);
        for (std::size_t i : order) margin[i] = std::fabs(decision_value(clf, xs[i]));
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return margin[a] < margin[b]; });
        order.resize(std::min(k, order.size()));
        for (std::size_t i = 1; i < order.size(); ++i) ties += margin[order[i]] == margin[order[i - 1]];

        std::vector<std::size_t> got;
        for (const auto& item : select_svm_active(clf, pool, k).items) got.push_back(*item.pool_index);
        mismatches += got != order;
    }
    return {mismatches == 0, std::to_string(mismatches) + " of 100 pools differ (" + std::to_string(ties) + " exact ties exercised)"};
}

// ---------------------------------------------------------------- gan

const std::vector<double> kMeanPos{0.5, 0.0}, kMeanNeg{-0.5, 0.0};
constexpr double kSigma = 0.075;

struct GanFixture {
    Dataset pool = make_two_gaussians(2000, kMeanPos, kMeanNeg, kSigma, 1);
    std::vector<GeneratorNet> generators;  // one per training seed 1..10
};

GanFixture& gan_fixture() {
    static GanFixture f;
    return f;
}

Outcome gan_mode_coverage() {
    auto& f = gan_fixture();
    std::size_t passing = 0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        GanConfig cfg;
        cfg.seed = seed;
        f.generators.push_back(train_gan(f.pool.as_matrix(), cfg).generator);
        const Tensor x = generator_forward(f.generators.back(), stack_rows(sample_latent(cfg.latent_dim, 1000, 1000 + seed)));
        std::size_t pos = 0, neg = 0;
        for (std::size_t i = 0; i < 1000; ++i) {
            if (squared_distance(x.row(i), kMeanPos) <= 9 * kSigma * kSigma) ++pos;
            else if (squared_distance(x.row(i), kMeanNeg) <= 9 * kSigma * kSigma) ++neg;
        }
        const bool ok = pos + neg >= 900 && pos >= 200 && neg >= 200;
        passing += ok;
        per_seed += (per_seed.empty() ? "" : " ") + std::to_string(pos + neg) + (ok ? "" : "*");
    }
    return {passing >= 8, std::to_string(passing) + "/10 seeds pass; in-mode counts " + per_seed};
}

Outcome boundary_seeking() {
    auto& f = gan_fixture();
    if (f.generators.size() != 10) return {false, "no trained generators (coverage criterion did not run)"};
    std::size_t wins = 0;
    double gaal_total = 0.0, gan_total = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const GeneratorNet& g = f.generators[seed - 1];
        // Mid-training learner: an SVM fit to a 20-instance initial set.
        Pool pool = Pool::from(f.pool);
        Rng rng(seed);
        LabeledSet s;
        for (const auto& item : select_random(pool, 20, rng).items) s.add(item.x, f.pool.labels[*item.pool_index]);
        const LinearClassifier clf = svm_train(s);

        SynthConfig sc;
        sc.seed = seed;
        double gaal = 0.0, gan = 0.0;
        for (const auto& q : select_gaal(clf, g, 10, sc).items) gaal += std::fabs(decision_value(clf, q.x)) / 10;
        for (const auto& q : select_simple_gan(g, 10, seed).items) gan += std::fabs(decision_value(clf, q.x)) / 10;
        wins += gaal < gan;
        gaal_total += gaal / 10;
        gan_total += gan / 10;
    }
    return {wins >= 9, std::to_string(wins) + "/10 seeds; mean |f| gaal " + fmt("%.4f", gaal_total) + " vs simple_gan " +
                           fmt("%.4f", gan_total)};
}

// ---------------------------------------------------------------- learning curves

const char* kShiftConfig = R"(config_version=1
compare_strategies=gaal,random
init_size=50
batch_size=10
budget=100
oracle=ground_truth
dataset=two_gaussians
pool_size=2000
test_size=1000
mean_pos=0.5,0
mean_neg=-0.5,0
sigma=0.075
shift_translation=0.3,0
shift_noise=0.1
seeds=0-9
)";

std::optional<Comparison> shift_comparison;

double accuracy_at(const Comparison& cmp, StrategyKind kind, std::size_t labeled) {
    for (const auto& s : cmp.summaries)
        if (s.strategy == kind)
            for (const auto& p : s.points)
                if (p.labeled_count == labeled) return p.mean_accuracy;
    return std::numeric_limits<double>::quiet_NaN();
}

Outcome shift_curve_ordering() {
    const ExperimentConfig cfg = parse_config(kShiftConfig);
    const Experiment exp = prepare_experiment(cfg, true);
    shift_comparison = compare_strategies(expand_comparison(cfg), exp);
    const double gaal = accuracy_at(*shift_comparison, StrategyKind::Gaal, 100);
    const double random = accuracy_at(*shift_comparison, StrategyKind::Random, 100);
    return {gaal >= random - 0.02, "mean accuracy at 100 labels: gaal " + fmt("%.4f", gaal) + ", random " + fmt("%.4f", random) +
                                       ", supervised " + fmt("%.4f", shift_comparison->supervised_accuracy)};
}

Outcome mixed_schedule_pattern() {
    std::string got;
    bool ok = true;
    for (std::size_t it = 0; it < 60; ++it) {
        const StrategyKind expect = it % 6 == 5 ? StrategyKind::Random : StrategyKind::Gaal;
        ok = ok && mixed_schedule(it) == expect && strategy_at(StrategyKind::Mixed, it) == expect;
        got += mixed_schedule(it) == StrategyKind::Random ? 'R' : 'G';
    }
    return {ok, got.substr(0, 18) + "..."};
}

Outcome budget_conservation(const fs::path& work) {
    ExperimentConfig base;
    base.dataset.pool_size = 400;
    base.dataset.test_size = 200;
    base.init_size = 20;
    base.batch_size = 10;
    base.budget = 65;  // the last batch is truncated to five
    base.synth.steps = 30;
    base.seeds = {0, 1, 2};

    const StrategyKind strategies[] = {StrategyKind::Gaal, StrategyKind::SimpleGan, StrategyKind::SvmActive,
                                       StrategyKind::Random, StrategyKind::Mixed, StrategyKind::Supervised};
    std::size_t runs = 0, violations = 0, skips = 0;
    std::optional<GeneratorNet> generator;
    for (OracleKind oracle : {OracleKind::GroundTruth, OracleKind::NearestNeighbor}) {
        ExperimentConfig cfg = base;
        cfg.oracle = oracle;
        const Experiment exp = prepare_experiment(cfg, true);
        if (!generator) generator = exp.generator;
        for (StrategyKind kind : strategies) {
            cfg.strategy = kind;
            for (std::uint64_t seed : cfg.seeds) {
                const RunResult r = run_active_learning(cfg, exp, seed);
                ++runs;
                skips += r.skipped;
                violations += r.labeled + r.skipped + r.remaining != r.budget || r.oracle_calls != r.labeled + r.skipped;
            }
        }
    }

    // Human sessions driven to completion with scripted verdicts.
    const fs::path checkpoint = work / "conservation_generator.gaalnet";
    save_network(checkpoint, generator->net());
    LabelingService service(ServiceOptions{{}, false});
    Rng verdicts(99);
    for (StrategyKind kind : strategies) {
        if (kind == StrategyKind::Supervised) continue;
        ExperimentConfig cfg = base;
        cfg.oracle = OracleKind::Human;
        cfg.strategy = kind;
        cfg.gan_checkpoint = checkpoint.string();
        const std::string id = service.create_session(cfg);
        while (service.get_state(id).phase == Phase::AwaitingLabels) {
            std::vector<OracleResponse> responses;
            for (const auto& p : service.get_pending(id)) {
                const auto r = verdicts.below(3);
                responses.push_back({p.query_id, r == 0 ? Verdict::Skip : r == 1 ? Verdict::Positive : Verdict::Negative});
            }
            service.post_labels(id, responses);
        }
        const SessionState st = service.get_state(id);
        ++runs;
        skips += st.skipped_count;
        violations += st.phase != Phase::Done || st.labeled_count + st.skipped_count + st.budget_remaining != st.budget;
    }
    return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(runs) + " completed runs (" +
                                 std::to_string(skips) + " skips)"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome cli_determinism(const std::string& gaal_bin, const fs::path& work) {
    if (gaal_bin.empty()) return {false, "no --gaal binary given"};
    const fs::path cfg = work / "determinism.conf";
    {
        std::ofstream out(cfg);
        out << kShiftConfig << "strategy=gaal\n";
    }
    std::vector<std::string> curves;
    for (const char* tag : {"a", "b"}) {
        const fs::path out = work / ("determinism_" + std::string(tag));
        fs::remove_all(out);
        const std::string cmd = "\"" + gaal_bin + "\" run --config \"" + cfg.string() + "\" --seed 3 --out \"" + out.string() +
                                "\" > \"" + (work / "determinism.log").string() + "\" 2>&1";
        if (std::system(cmd.c_str()) != 0) return {false, "gaal run failed, see " + (work / "determinism.log").string()};
        curves.push_back(slurp(out / "curve_gaal_3.csv"));
    }
    const bool same = !curves[0].empty() && curves[0] == curves[1];
    return {same, std::to_string(curves[0].size()) + " bytes, " + (same ? "identical" : "different")};
}

// ---------------------------------------------------------------- idx

std::vector<std::uint8_t> golden_images(std::uint32_t count, std::uint32_t rows, std::uint32_t cols, std::uint32_t seed) {
    std::vector<std::uint8_t> b;
    for (std::uint32_t v : {0x00000803u, count, rows, cols})
        for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
    std::uint32_t state = seed;
    for (std::uint64_t i = 0; i < std::uint64_t{count} * rows * cols; ++i) {
        state = state * 1664525u + 1013904223u;
        b.push_back(static_cast<std::uint8_t>(state >> 24));
    }
    return b;
}

std::vector<std::uint8_t> golden_labels(std::uint32_t count, std::uint32_t seed) {
    std::vector<std::uint8_t> b;
    for (std::uint32_t v : {0x00000801u, count})
        for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
    for (std::uint32_t i = 0; i < count; ++i) b.push_back(static_cast<std::uint8_t>((i * 7 + seed) % 10));
    return b;
}

Outcome idx_round_trip() {
    struct Case {
        std::uint32_t count, rows, cols;
    };
    std::size_t files = 0, identical = 0;
    for (const Case c : {Case{1, 28, 28}, Case{3, 16, 16}, Case{10, 1, 5}, Case{25, 28, 28}}) {
        const auto img = golden_images(c.count, c.rows, c.cols, c.count + c.rows);
        const auto lab = golden_labels(c.count, c.cols);
        identical += serialize_idx_images(parse_idx_images(img)) == img;
        identical += serialize_idx_labels(parse_idx_labels(lab)) == lab;
        files += 2;
    }
    return {identical == files, std::to_string(identical) + "/" + std::to_string(files) + " files byte-identical"};
}

// ---------------------------------------------------------------- report

Outcome supervised_baseline_line(const fs::path& work) {
    if (!shift_comparison) return {false, "no comparison (shift criterion did not run)"};
    const Comparison& cmp = *shift_comparison;
    const std::string svg = render_comparison_svg(cmp);
    {
        std::ofstream out(work / "comparison.svg");
        out << svg;
    }
    const std::regex line_re(
        R"re(<line class="supervised-baseline" x1="([-0-9.]+)" y1="([-0-9.]+)" x2="([-0-9.]+)" y2="([-0-9.]+)"[^>]*stroke-dasharray="[^"]+"[^>]*/>)re");
    const auto begin = std::sregex_iterator(svg.begin(), svg.end(), line_re);
    const auto count = std::distance(begin, std::sregex_iterator());
    if (count != 1) return {false, std::to_string(count) + " dashed supervised-baseline lines"};
    const std::smatch m = *begin;
    const double x1 = std::stod(m[1]), y1 = std::stod(m[2]), x2 = std::stod(m[3]), y2 = std::stod(m[4]);

    // Expected placement from the chart layout: plot area [70, 550] x [30, 390],
    // accuracy range = data range padded by 0.02, clipped to [0, 1], span >= 0.05.
    const double left = 70, right_edge = 720 - 170, top = 30, bottom_edge = 440 - 50;
    double lo = cmp.supervised_accuracy, hi = cmp.supervised_accuracy;
    for (const auto& s : cmp.summaries)
        if (s.strategy != StrategyKind::Supervised)
            for (const auto& p : s.points) {
                lo = std::min(lo, p.mean_accuracy - p.std_err);
                hi = std::max(hi, p.mean_accuracy + p.std_err);
            }
    double y_min = std::max(0.0, lo - 0.02), y_max = std::min(1.0, hi + 0.02);
    if (y_max - y_min < 0.05) {
        y_min = std::max(0.0, y_max - 0.05);
        y_max = y_min + 0.05;
    }
    const double expect_y = top + (y_max - cmp.supervised_accuracy) / (y_max - y_min) * (bottom_edge - top);
    const bool spans = std::fabs(x1 - left) < 0.01 && std::fabs(x2 - right_edge) < 0.01;
    const bool level = y1 == y2 && std::fabs(y1 - expect_y) <= 0.01;

    // Every plotted point must sit on the correct side of the line.
    std::size_t wrong_side = 0;
    const std::regex poly_re(R"re(<polyline class="curve curve-[a-z_]+"[^>]*points="([^"]*)")re");
    std::vector<double> point_ys;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly_re); it != std::sregex_iterator(); ++it) {
        std::istringstream pts((*it)[1].str());
        std::string pair;
        while (pts >> pair) point_ys.push_back(std::stod(pair.substr(pair.find(',') + 1)));
    }
    std::size_t idx = 0;
    for (const auto& s : cmp.summaries) {
        if (s.strategy == StrategyKind::Supervised) continue;
        for (const auto& p : s.points) {
            if (idx >= point_ys.size()) return {false, "fewer polyline points than summary points"};
            const double py = point_ys[idx++];
            if (std::fabs(p.mean_accuracy - cmp.supervised_accuracy) > 1e-3 && (p.mean_accuracy > cmp.supervised_accuracy) != (py < y1))
                ++wrong_side;
        }
    }
    return {spans && level && wrong_side == 0 && idx == point_ys.size(),
            "line y " + fmt("%.2f", y1) + " (expected " + fmt("%.2f", expect_y) + "), spans plot " + (spans ? "yes" : "no") +
                ", points on wrong side " + std::to_string(wrong_side) + ", svg at " + (work / "comparison.svg").string()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gaal acceptance suite"};
    std::string gaal_bin, work_dir = "acceptance_work";
    app.add_option("--gaal", gaal_bin, "path to the gaal CLI");
    app.add_option("--work", work_dir, "scratch directory");
    CLI11_PARSE(app, argc, argv);
    const fs::path work(work_dir);
    fs::create_directories(work);

    const std::vector<Criterion> criteria{
        {"gradient-correctness", 10, gradient_correctness},
        {"gaal-objective-gradient", 10, gaal_gradient_correctness},
        {"svm-oracle-equivalence", 30, svm_equivalence},
        {"pool-selection-equivalence", 30, pool_selection_equivalence},
        {"gan-mode-coverage", 300, gan_mode_coverage},
        {"boundary-seeking", 120, boundary_seeking},
        {"shift-curve-ordering", 600, shift_curve_ordering},
        {"mixed-schedule", 0, mixed_schedule_pattern},
        {"budget-conservation", 0, [&] { return budget_conservation(work); }},
        {"cli-determinism", 0, [&] { return cli_determinism(gaal_bin, work); }},
        {"idx-round-trip", 0, idx_round_trip},
        {"supervised-baseline-line", 0, [&] { return supervised_baseline_line(work); }},
    };

    std::size_t failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.time_limit_s == 0 || secs < c.time_limit_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::cout << (pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " [" << fmt("%.1f", secs) << " s"
                  << (c.time_limit_s > 0 ? " / limit " + fmt("%.0f", c.time_limit_s) + " s" : "") << (in_time ? "" : ", TOO SLOW")
                  << "]" << std::endl;
    }
    std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << " (" << criteria.size() << " criteria)"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
