#include <cmath>

#include "doctest.h"
#include "gaal/errors.hpp"
#include "gaal/synth.hpp"
#include "support.hpp"

using namespace gaal;

namespace {

GeneratorNet tanh_identity() {
    return GeneratorNet(Mlp({{1, 1, Activation::Tanh}}, {Tensor(Shape{1, 1}, 1.0), Tensor(Shape{1}, 0.0)}));
}

GeneratorNet random_generator(std::uint64_t seed, std::size_t latent = 4, std::size_t out = 3) {
    GeneratorNet g = GeneratorNet::create(latent, {8}, out, seed);
    for (auto& p : g.net().params())
        for (auto& v : p.data()) v *= 60.0;  // pull weights out of the near-zero init regime
    return g;
}

}  // namespace

TEST_CASE("objective examples") {
    const GeneratorNet g = tanh_identity();
    CHECK(gaal_objective(LinearClassifier(Tensor::vector({1.0}), 0.0), g, Tensor::vector({0.0})) == 0.0);
    const LinearClassifier constant(Tensor::vector({0.0}), 1.0);
    for (double z : {-3.0, 0.0, 0.7}) CHECK(gaal_objective(constant, g, Tensor::vector({z})) == 1.0);
}

TEST_CASE("objective matches the composed recompute") {
    const GeneratorNet g = random_generator(3);
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const LinearClassifier clf(Tensor::vector({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}),
                                   rng.uniform(-0.5, 0.5));
        const Tensor z = Tensor::vector({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        const double expect = std::fabs(decision_value(clf, generator_forward(g, z)));
        CHECK(std::fabs(gaal_objective(clf, g, z) - expect) <= 1e-12);
    }
}

TEST_CASE("gradient examples") {
    const GeneratorNet g = tanh_identity();
    CHECK(gaal_gradient(LinearClassifier(Tensor::vector({0.0}), 1.0), g, Tensor::vector({0.4}))[0] == 0.0);
    const double t = std::tanh(0.5);
    const double grad = gaal_gradient(LinearClassifier(Tensor::vector({1.0}), 0.0), g, Tensor::vector({0.5}))[0];
    CHECK(grad == doctest::Approx(1.0 - t * t).epsilon(1e-12));
    CHECK(grad == doctest::Approx(0.7864).epsilon(1e-4));
}

TEST_CASE("gradient matches finite differences on random nets") {
    Rng rng(9);
    for (int t = 0; t < 10; ++t) {
        const GeneratorNet g = random_generator(100 + t);
        const LinearClassifier clf(Tensor::vector({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}), 0.3);
        const Tensor z = Tensor::vector({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        if (gaal_objective(clf, g, z) < 1e-3) continue;  // too close to the kink
        const Tensor grad = gaal_gradient(clf, g, z);
        auto f = [&](const Tensor& zz) { return gaal_objective(clf, g, zz); };
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(testing::relative_error(grad[i], testing::central_difference(f, z, i)) < 1e-4);
    }
}

TEST_CASE("diversity penalty examples") {
    const Tensor c = Tensor::vector({0.0, 0.0});
    CHECK(diversity_penalty(c, {}) == 0.0);
    const std::vector<Tensor> same{Tensor::vector({0.0, 0.0})};
    CHECK(diversity_penalty(c, same) == 1.0);
    const std::vector<Tensor> two{Tensor::vector({1.0, 0.0}), Tensor::vector({0.0, 2.0})};
    CHECK(diversity_penalty(c, two, 1.0) == doctest::Approx(std::exp(-0.5) + std::exp(-2.0)).epsilon(1e-12));
    CHECK(diversity_penalty(c, two, 1.0) == doctest::Approx(0.7419).epsilon(1e-4));
}

TEST_CASE("penalized gradient matches finite differences") {
    const GeneratorNet g = random_generator(21);
    const LinearClassifier clf(Tensor::vector({0.4, -0.9, 0.2}), 0.1);
    const std::vector<Tensor> prior{Tensor::vector({0.1, 0.2, -0.3}), Tensor::vector({-0.5, 0.0, 0.4})};
    const Tensor z = Tensor::vector({0.3, -0.2, 0.6, -0.7});
    const Tensor grad = gaal_gradient(clf, g, z, prior, 0.5, 0.8);
    auto f = [&](const Tensor& zz) { return gaal_objective(clf, g, zz, prior, 0.5, 0.8); };
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(testing::relative_error(grad[i], testing::central_difference(f, z, i)) < 1e-4);
}

TEST_CASE("synthesize_queries bookkeeping") {
    const GeneratorNet g = random_generator(4);
    const LinearClassifier clf(Tensor::vector({0.8, -0.3, 0.5}), 0.2);
    SynthConfig cfg;
    cfg.restarts = 10;
    cfg.seed = 3;
    cfg.record_trajectory = true;
    const auto qs = synthesize_queries(clf, g, 10, cfg);
    REQUIRE(qs.size() == 10);
    std::vector<bool> seen(10, false);
    for (const auto& q : qs) {
        CHECK(q.objective_value <= q.initial_objective);
        CHECK(std::fabs(q.objective_value - std::fabs(decision_value(clf, q.x))) <= 1e-10);
        const Tensor x = generator_forward(g, q.z);
        for (std::size_t i = 0; i < x.numel(); ++i) CHECK(std::fabs(x[i] - q.x[i]) <= 1e-12);
        CHECK(!seen[q.restart_index]);
        seen[q.restart_index] = true;
        // Best-so-far along the trajectory is non-increasing by construction; its minimum is what was kept.
        double best = q.trajectory.front();
        for (double v : q.trajectory) best = std::min(best, v);
        CHECK(best == doctest::Approx(q.objective_value).epsilon(1e-12));
    }
    for (std::size_t i = 1; i < qs.size(); ++i) CHECK(qs[i - 1].objective_value <= qs[i].objective_value);
}

TEST_CASE("synthesize_queries with a degenerate classifier") {
    const GeneratorNet g = random_generator(4);
    const auto qs = synthesize_queries(LinearClassifier(Tensor(Shape{3}, 0.0), 0.0), g, 5, SynthConfig{});
    REQUIRE(qs.size() == 5);
    for (const auto& q : qs) CHECK(q.objective_value == 0.0);
}

TEST_CASE("synthesize_queries errors and determinism") {
    const GeneratorNet g = random_generator(4);
    const LinearClassifier clf(Tensor::vector({0.8, -0.3, 0.5}), 0.2);
    SynthConfig few;
    few.restarts = 3;
    CHECK_THROWS_AS(synthesize_queries(clf, g, 5, few), ConfigError);
    CHECK_THROWS_AS(synthesize_queries(clf, g, 0, SynthConfig{}), ContractError);

    SynthConfig cfg;
    cfg.seed = 12;
    const auto a = synthesize_queries(clf, g, 4, cfg), b = synthesize_queries(clf, g, 4, cfg);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a[i].z == b[i].z);
        CHECK(a[i].restart_index == b[i].restart_index);
    }
}

TEST_CASE("diversity term spreads the batch") {
    const GeneratorNet g = random_generator(31, 4, 2);
    const LinearClassifier clf(Tensor::vector({1.0, 0.0}), 0.0);
    SynthConfig plain;
    plain.seed = 2;
    SynthConfig diverse = plain;
    diverse.diversity_weight = 1.0;
    diverse.diversity_sigma = 0.3;
    auto spread = [](const std::vector<SynthesizedQuery>& qs) {
        double total = 0.0;
        for (std::size_t i = 0; i < qs.size(); ++i)
            for (std::size_t j = i + 1; j < qs.size(); ++j) total += std::sqrt(squared_distance(qs[i].x.data(), qs[j].x.data()));
        return total;
    };
    const auto a = synthesize_queries(clf, g, 5, plain);
    const auto b = synthesize_queries(clf, g, 5, diverse);
    CHECK(spread(b) >= spread(a));
    for (const auto& q : b) CHECK(q.penalized_objective >= q.objective_value);
}
