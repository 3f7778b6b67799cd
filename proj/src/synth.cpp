#include "gaal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gaal/autodiff.hpp"
#include "gaal/errors.hpp"
#include "gaal/optim.hpp"
#include "gaal/rng.hpp"

namespace gaal {

void SynthConfig::validate() const {
    if (steps == 0) throw ConfigError("synthesis needs at least one step per restart", "synth_steps");
    if (!(learning_rate > 0.0)) throw ConfigError("synthesis learning rate must be positive", "synth_learning_rate");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("synthesis momentum must lie in [0,1)", "synth_momentum");
    if (!(diversity_weight >= 0.0)) throw ConfigError("diversity weight must be non-negative", "diversity_weight");
    if (!(diversity_sigma > 0.0)) throw ConfigError("diversity sigma must be positive", "diversity_sigma");
}

namespace {

void check_chain(const LinearClassifier& clf, const GeneratorNet& g) {
    if (clf.feature_dim() != g.output_dim())
        throw DimensionError("generator emits " + std::to_string(g.output_dim()) + " features, classifier expects " +
                             std::to_string(clf.feature_dim()));
}

struct Recorded {
    ad::Var objective;  // scalar: sum over rows of the per-row objective
    ad::Var margin;     // [rows, 1] of |f(G(z))|
    ad::Var x;          // [rows, dim]
};

// Objective for a batch of latent codes [rows, latent]; rows are independent
// unless a diversity term is present (callers only batch without it).
Recorded record_objective(ad::Tape& tape, const LinearClassifier& clf, const GeneratorNet& g, ad::Var z,
                          std::span<const Tensor> prior, double weight, double sigma) {
    auto params = g.net().bind(tape, false);
    ad::Var x = g.net().forward(params, z);
    ad::Var w = tape.constant(clf.weights().reshaped(Shape{1, clf.feature_dim()}));
    ad::Var b = tape.constant(Tensor(Shape{1}, clf.bias()));
    ad::Var margin = ad::abs(ad::affine(x, w, b));
    ad::Var total = ad::sum(margin);
    if (weight > 0.0 && !prior.empty()) {
        const double inv = -1.0 / (2.0 * sigma * sigma);
        if (x.value().rows() != 1) throw ContractError("diversity objective expects a single latent code");
        for (const auto& p : prior) {
            ad::Var diff = ad::sub(x, tape.constant(p.reshaped(x.value().shape())));
            ad::Var kernel = ad::exp(ad::scale(ad::sum(ad::square(diff)), inv));
            total = ad::add(total, ad::scale(kernel, weight));
        }
    }
    return {total, margin, x};
}

Tensor as_vector_z(const GeneratorNet& g, const Tensor& z) {
    if (z.numel() != g.latent_dim())
        throw DimensionError("latent vector has " + std::to_string(z.numel()) + " entries, generator expects " +
                             std::to_string(g.latent_dim()));
    return z.reshaped(Shape{1, g.latent_dim()});
}

struct RestartTrack {
    double best = std::numeric_limits<double>::infinity();
    double best_margin = 0.0;
    double initial = 0.0;
    Tensor best_z;
    Tensor best_x;
    std::vector<double> trajectory;
};

// Momentum descent on rows of `z` (each row is one restart). With a diversity
// term present only a single row is allowed.
std::vector<RestartTrack> descend(const LinearClassifier& clf, const GeneratorNet& g, Tensor z,
                                  const SynthConfig& config, std::span<const Tensor> prior) {
    const std::size_t rows = z.dim(0), latent = z.dim(1), dim = g.output_dim();
    std::vector<RestartTrack> tracks(rows);
    OptimizerState opt(OptimizerSettings::sgd(config.learning_rate, config.momentum));
    const double weight = config.diversity_weight;

    auto evaluate = [&](bool take_step) {
        ad::Tape tape;
        ad::Var zv = tape.leaf(z, true);
        Recorded rec = record_objective(tape, clf, g, zv, prior, weight, config.diversity_sigma);
        const double diversity = rows == 1 ? rec.objective.value().item() - rec.margin.value()[0] : 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            const double margin = rec.margin.value()[r];
            const double value = margin + diversity;
            auto& t = tracks[r];
            if (config.record_trajectory) t.trajectory.push_back(value);
            if (std::isinf(t.best)) t.initial = value;
            if (value < t.best) {
                t.best = value;
                t.best_margin = margin;
                auto zr = z.row(r);
                t.best_z = Tensor(Shape{latent}, std::vector<double>(zr.begin(), zr.end()));
                auto xr = rec.x.value().row(r);
                t.best_x = Tensor(Shape{dim}, std::vector<double>(xr.begin(), xr.end()));
            }
        }
        if (!take_step) return;
        tape.backward(rec.objective);
        Tensor grad = zv.grad();
        opt.step(std::span(&z, 1), std::span<const Tensor>(&grad, 1));
    };

    for (std::size_t s = 0; s < config.steps; ++s) evaluate(true);
    evaluate(false);
    return tracks;
}

}  // namespace

double diversity_penalty(const Tensor& candidate, std::span<const Tensor> prior, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("diversity sigma must be positive", "diversity_sigma");
    double total = 0.0;
    for (const auto& p : prior) total += std::exp(-squared_distance(candidate.data(), p.data()) / (2.0 * sigma * sigma));
    return total;
}

double gaal_objective(const LinearClassifier& clf, const GeneratorNet& g, const Tensor& z) {
    check_chain(clf, g);
    return std::fabs(decision_value(clf, generator_forward(g, as_vector_z(g, z).reshaped(Shape{g.latent_dim()}))));
}

double gaal_objective(const LinearClassifier& clf, const GeneratorNet& g, const Tensor& z,
                      std::span<const Tensor> prior, double weight, double sigma) {
    check_chain(clf, g);
    const Tensor x = generator_forward(g, as_vector_z(g, z).reshaped(Shape{g.latent_dim()}));
    double value = std::fabs(decision_value(clf, x));
    if (weight > 0.0) value += weight * diversity_penalty(x, prior, sigma);
    return value;
}

Tensor gaal_gradient(const LinearClassifier& clf, const GeneratorNet& g, const Tensor& z) {
    return gaal_gradient(clf, g, z, {}, 0.0, 1.0);
}

Tensor gaal_gradient(const LinearClassifier& clf, const GeneratorNet& g, const Tensor& z,
                     std::span<const Tensor> prior, double weight, double sigma) {
    check_chain(clf, g);
    ad::Tape tape;
    ad::Var zv = tape.leaf(as_vector_z(g, z), true);
    Recorded rec = record_objective(tape, clf, g, zv, prior, weight, sigma);
    tape.backward(rec.objective);
    return zv.grad().reshaped(z.shape());
}

std::vector<SynthesizedQuery> synthesize_queries(const LinearClassifier& clf, const GeneratorNet& g, std::size_t k,
                                                 const SynthConfig& config) {
    config.validate();
    check_chain(clf, g);
    if (k == 0) throw ContractError("synthesize_queries needs k >= 1");
    const std::size_t restarts = config.restarts_for(k);
    if (restarts < k)
        throw ConfigError("need at least " + std::to_string(k) + " restarts for " + std::to_string(k) +
                              " queries, got " + std::to_string(restarts),
                          "synth_restarts");

    const Rng root(config.seed);
    const std::size_t latent = g.latent_dim();
    auto start_point = [&](std::size_t r) {
        Rng rng = root.split(static_cast<std::uint64_t>(r));
        return sample_latent(latent, 1, rng).front();
    };

    std::vector<RestartTrack> tracks;
    if (config.diversity_weight > 0.0) {
        std::vector<Tensor> prior;
        for (std::size_t r = 0; r < restarts; ++r) {
            auto one = descend(clf, g, start_point(r).reshaped(Shape{1, latent}), config, prior);
            prior.push_back(one.front().best_x);
            tracks.push_back(std::move(one.front()));
        }
    } else {
        std::vector<Tensor> starts;
        for (std::size_t r = 0; r < restarts; ++r) starts.push_back(start_point(r));
        tracks = descend(clf, g, stack_rows(starts), config, {});
    }

    std::vector<std::size_t> order(restarts);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return tracks[a].best < tracks[b].best; });

    std::vector<SynthesizedQuery> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        auto& t = tracks[order[i]];
        SynthesizedQuery q;
        q.z = std::move(t.best_z);
        q.x = std::move(t.best_x);
        q.objective_value = t.best_margin;
        q.penalized_objective = t.best;
        q.initial_objective = t.initial;
        q.restart_index = order[i];
        q.trajectory = std::move(t.trajectory);
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace gaal
