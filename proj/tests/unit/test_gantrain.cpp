#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gaal/data.hpp"
#include "gaal/errors.hpp"
#include "gaal/gantrain.hpp"

using namespace gaal;

namespace {

DiscriminatorNet constant_discriminator(double logit) {
    DiscriminatorNet d = DiscriminatorNet::create(2, {3}, 0);
    for (auto& p : d.net().params())
        for (auto& v : p.data()) v = 0.0;
    d.net().params().back() = Tensor::vector({logit});
    return d;
}

double clamp_p(double p) { return std::min(std::max(p, 1e-7), 1.0 - 1e-7); }

}  // namespace

TEST_CASE("d_loss and g_loss at D = 0.5") {
    const auto d = constant_discriminator(0.0);
    const Tensor real = Tensor::matrix({{0.1, 0.2}, {0.3, -0.4}});
    const Tensor fake = Tensor::matrix({{-0.5, 0.9}});
    CHECK(d_loss(d, real, fake) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(g_loss(d, fake) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("loss limits are bounded by the clamp") {
    // A huge positive logit makes D -> 1 everywhere.
    const auto d = constant_discriminator(60.0);
    const Tensor batch = Tensor::matrix({{0.1, 0.2}});
    CHECK(g_loss(d, batch) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(g_loss(d, batch) >= 0.0);
    CHECK(d_loss(d, batch, batch) == doctest::Approx(-std::log(1e-7)).epsilon(1e-6));
}

TEST_CASE("losses match direct formula evaluation") {
    const DiscriminatorNet d = DiscriminatorNet::create(2, {8}, 5);
    DiscriminatorNet strong = d;
    for (auto& p : strong.net().params())
        for (auto& v : p.data()) v *= 80.0;
    Rng rng(4);
    Tensor real(Shape{6, 2}), fake(Shape{5, 2});
    for (auto& v : real.data()) v = rng.uniform(-1, 1);
    for (auto& v : fake.data()) v = rng.uniform(-1, 1);

    double lr = 0.0, lf = 0.0, lg = 0.0;
    for (std::size_t i = 0; i < 6; ++i) lr -= std::log(clamp_p(discriminator_forward(strong, Tensor::vector({real.at(i, 0), real.at(i, 1)}))));
    for (std::size_t i = 0; i < 5; ++i) {
        const double p = clamp_p(discriminator_forward(strong, Tensor::vector({fake.at(i, 0), fake.at(i, 1)})));
        lf -= std::log(1.0 - p);
        lg -= std::log(p);
    }
    CHECK(std::fabs(d_loss(strong, real, fake) - (lr / 6 + lf / 5)) <= 1e-10);
    CHECK(std::fabs(g_loss(strong, fake) - lg / 5) <= 1e-10);
}

TEST_CASE("empty batches are contract errors") {
    const auto d = constant_discriminator(0.0);
    CHECK_THROWS_AS(g_loss(d, Tensor(Shape{})), ContractError);
}

TEST_CASE("train_gan rejects an undersized pool") {
    GanConfig cfg;
    cfg.batch_size = 16;
    CHECK_THROWS_AS(train_gan(Tensor(Shape{8, 2}, 0.1), cfg), ConfigError);
}

TEST_CASE("train_gan is deterministic per seed") {
    const Dataset pool = make_two_gaussians(200, std::vector<double>{0.5, 0}, std::vector<double>{-0.5, 0}, 0.075, 3);
    GanConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 17;
    const auto a = train_gan(pool.as_matrix(), cfg);
    const auto b = train_gan(pool.as_matrix(), cfg);
    CHECK(a.generator == b.generator);
    CHECK(a.discriminator == b.discriminator);
    REQUIRE(a.history.size() == 5);
    CHECK(a.history.back().d_loss == b.history.back().d_loss);

    std::ostringstream csv;
    write_loss_history_csv(csv, a.history);
    CHECK(csv.str().rfind("epoch,d_loss,g_loss\n", 0) == 0);
}

TEST_CASE("trained GAN covers both modes and leaves D undecided") {
    const std::vector<double> mp{0.5, 0}, mn{-0.5, 0};
    const double sigma = 0.075;
    const Dataset pool = make_two_gaussians(2000, mp, mn, sigma, 1);
    GanConfig cfg;
    cfg.seed = 1;
    const auto gan = train_gan(pool.as_matrix(), cfg);
    const Tensor x = generator_forward(gan.generator, stack_rows(sample_latent(cfg.latent_dim, 1000, 99)));
    std::size_t near_pos = 0, near_neg = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        const auto row = x.row(i);
        if (squared_distance(row, mp) <= 9 * sigma * sigma) ++near_pos;
        else if (squared_distance(row, mn) <= 9 * sigma * sigma) ++near_neg;
    }
    CHECK(near_pos + near_neg >= 900);
    CHECK(near_pos >= 200);
    CHECK(near_neg >= 200);
    const Tensor probs = discriminator_forward_batch(gan.discriminator, x);
    double mean = 0.0;
    for (double p : probs.values()) mean += p / 1000.0;
    CHECK(mean > 0.2);
    CHECK(mean < 0.8);
}
