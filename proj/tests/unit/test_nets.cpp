#include <cmath>

#include "doctest.h"
#include "gaal/autodiff.hpp"
#include "gaal/errors.hpp"
#include "gaal/nets.hpp"
#include "support.hpp"

using namespace gaal;

namespace {

// Layer-by-layer evaluation written independently of Mlp::forward.
std::vector<double> manual_forward(const Mlp& net, std::vector<double> x) {
    const auto& specs = net.specs();
    for (std::size_t l = 0; l < specs.size(); ++l) {
        const Tensor& w = net.params()[2 * l];
        const Tensor& b = net.params()[2 * l + 1];
        std::vector<double> y(specs[l].out);
        for (std::size_t o = 0; o < specs[l].out; ++o) {
            double acc = b[o];
            for (std::size_t i = 0; i < specs[l].in; ++i) acc += w.values()[o * specs[l].in + i] * x[i];
            switch (specs[l].activation) {
                case Activation::Identity: break;
                case Activation::Relu: acc = acc > 0 ? acc : 0; break;
                case Activation::LeakyRelu: acc = acc > 0 ? acc : 0.2 * acc; break;
                case Activation::Tanh: acc = std::tanh(acc); break;
                case Activation::Sigmoid: acc = 1.0 / (1.0 + std::exp(-acc)); break;
            }
            y[o] = acc;
        }
        x = std::move(y);
    }
    return x;
}

Mlp scaled(Mlp net, double factor) {
    for (auto& p : net.params())
        for (auto& v : p.data()) v *= factor;
    return net;
}

}  // namespace

TEST_CASE("init is deterministic and shaped") {
    const std::vector<LayerSpec> specs{{4, 3, Activation::Relu}, {3, 2, Activation::Tanh}};
    const Mlp a = Mlp::init(specs, 42), b = Mlp::init(specs, 42);
    CHECK(a == b);
    CHECK(a.params()[0].shape() == Shape{3, 4});
    CHECK(a.params()[1].shape() == Shape{3});
    CHECK(!(Mlp::init(specs, 43) == a));
}

TEST_CASE("init rejects non-chaining dims") {
    CHECK_THROWS_AS(Mlp::init({{4, 3, Activation::Relu}, {5, 2, Activation::Tanh}}, 1), ConfigError);
}

TEST_CASE("init weight std is 0.02") {
    const Mlp net = Mlp::init({{100, 100, Activation::Identity}}, 7);
    double sum = 0.0, sq = 0.0;
    for (double v : net.params()[0].values()) {
        sum += v;
        sq += v * v;
    }
    const double n = 10000.0;
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::fabs(sd - 0.02) <= 0.002);
    for (double v : net.params()[1].values()) CHECK(v == 0.0);
}

TEST_CASE("generator forward examples") {
    SUBCASE("zero weights collapse to tanh(bias)") {
        GeneratorNet g = GeneratorNet::create(3, {4}, 2, 1);
        for (auto& p : g.net().params())
            for (auto& v : p.data()) v = 0.0;
        g.net().params().back() = Tensor::vector({0.3, -1.2});
        const Tensor x = generator_forward(g, Tensor::vector({0.5, -0.5, 0.1}));
        CHECK(x[0] == doctest::Approx(std::tanh(0.3)));
        CHECK(x[1] == doctest::Approx(std::tanh(-1.2)));
    }
    SUBCASE("output length") {
        const GeneratorNet g = GeneratorNet::create(5, {8}, 2, 1);
        CHECK(generator_forward(g, Tensor(Shape{5}, 0.1)).numel() == 2);
    }
    SUBCASE("dim mismatch") {
        const GeneratorNet g = GeneratorNet::create(5, {8}, 2, 1);
        CHECK_THROWS_AS(generator_forward(g, Tensor(Shape{4}, 0.1)), DimensionError);
    }
}

TEST_CASE("generator forward matches manual recompute") {
    GeneratorNet g = GeneratorNet::create(6, {10, 7}, 3, 5);
    g.net() = scaled(g.net(), 40.0);  // move away from the near-linear regime
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> z(6);
        for (auto& v : z) v = rng.uniform(-1, 1);
        const Tensor x = generator_forward(g, Tensor::vector(z));
        const auto expect = manual_forward(g.net(), z);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(std::fabs(x[i] - expect[i]) <= 1e-12);
            CHECK(std::fabs(x[i]) <= 1.0);
        }
    }
}

TEST_CASE("batched and single forward agree") {
    const GeneratorNet g = GeneratorNet::create(4, {6}, 2, 9);
    const auto zs = sample_latent(4, 5, 3);
    const Tensor batch = generator_forward(g, stack_rows(zs));
    for (std::size_t r = 0; r < zs.size(); ++r) {
        const Tensor single = generator_forward(g, zs[r]);
        CHECK(batch.at(r, 0) == single[0]);
        CHECK(batch.at(r, 1) == single[1]);
    }
}

TEST_CASE("discriminator forward examples") {
    DiscriminatorNet d = DiscriminatorNet::create(3, {5}, 4);
    SUBCASE("zero parameters give 0.5") {
        for (auto& p : d.net().params())
            for (auto& v : p.data()) v = 0.0;
        CHECK(discriminator_forward(d, Tensor::vector({1, 2, 3})) == 0.5);
    }
    SUBCASE("range and manual recompute") {
        d.net() = scaled(d.net(), 50.0);
        Rng rng(8);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            const double p = discriminator_forward(d, Tensor::vector(x));
            CHECK(p > 0.0);
            CHECK(p < 1.0);
            CHECK(std::fabs(p - manual_forward(d.net(), x)[0]) <= 1e-12);
        }
    }
    SUBCASE("dim mismatch") { CHECK_THROWS_AS(discriminator_forward(d, Tensor::vector({1, 2})), DimensionError); }
}

TEST_CASE("sample_latent examples") {
    CHECK(sample_latent(4, 0, 1).empty());
    const auto zs = sample_latent(10, 10000, 77);
    double sum = 0.0;
    for (const auto& z : zs)
        for (double v : z.values()) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
            sum += v;
        }
    CHECK(std::fabs(sum / 1e5) <= 0.01);
    CHECK(sample_latent(3, 4, 5)[2] == sample_latent(3, 4, 5)[2]);
}

TEST_CASE("generator is differentiable in z") {
    GeneratorNet g = GeneratorNet::create(4, {6}, 2, 12);
    g.net() = scaled(g.net(), 30.0);
    const Tensor z0 = Tensor::vector({0.2, -0.4, 0.7, 0.1});
    auto f = [&](const Tensor& z) {
        const Tensor x = generator_forward(g, z);
        return x[0] + 2.0 * x[1];
    };
    ad::Tape tape;
    auto params = g.net().bind(tape, false);
    auto z = tape.leaf(z0);
    auto x = g.net().forward(params, z);
    auto loss = ad::sum(ad::mul(x, tape.constant(Tensor::vector({1.0, 2.0}))));
    tape.backward(loss);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(testing::relative_error(z.grad()[i], testing::central_difference(f, z0, i)) < 1e-4);
}

TEST_CASE("network checkpoint round-trips") {
    const GeneratorNet g = GeneratorNet::create(3, {4}, 2, 6);
    const auto bytes = serialize_network(g.net());
    CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "GAALNET1");
    CHECK(deserialize_network(bytes) == g.net());

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_AS(deserialize_network(truncated), FormatError);
    auto padded = bytes;
    padded.push_back(0);
    CHECK_THROWS_AS(deserialize_network(padded), FormatError);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(deserialize_network(bad_magic), FormatError);
}
