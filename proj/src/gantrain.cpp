#include "gaal/gantrain.hpp"

#include <numeric>
#include <ostream>

#include "gaal/autodiff.hpp"
#include "gaal/errors.hpp"
#include "gaal/rng.hpp"

namespace gaal {

void GanConfig::validate() const {
    if (epochs == 0) throw ConfigError("gan epochs must be positive", "gan_epochs");
    if (batch_size == 0) throw ConfigError("gan batch size must be positive", "gan_batch_size");
    if (d_steps == 0) throw ConfigError("gan d_steps must be positive", "gan_d_steps");
    if (latent_dim == 0) throw ConfigError("latent dimension must be positive", "latent_dim");
    optimizer.validate();
}

namespace {

void require_batch(const Tensor& batch, const char* what) {
    if (batch.rank() != 2 || batch.dim(0) == 0) throw ContractError(std::string(what) + " batch must be non-empty");
}

ad::Var discriminator_loss(ad::Tape& tape, const Mlp& d, std::span<const ad::Var> d_params, const Tensor& real,
                           const Tensor& fake) {
    ad::Var p_real = d.forward(d_params, tape.constant(real));
    ad::Var p_fake = d.forward(d_params, tape.constant(fake));
    return ad::add(ad::binary_cross_entropy(p_real, 1.0), ad::binary_cross_entropy(p_fake, 0.0));
}

Tensor gather_rows(const Tensor& pool, std::span<const std::size_t> idx) {
    const std::size_t width = pool.cols();
    Tensor out(Shape{idx.size(), width});
    for (std::size_t r = 0; r < idx.size(); ++r) {
        auto src = pool.row(idx[r]);
        std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(r * width));
    }
    return out;
}

Tensor latent_batch(std::size_t count, std::size_t dim, Rng& rng) {
    Tensor z(Shape{count, dim});
    for (auto& v : z.data()) v = rng.uniform(-1.0, 1.0);
    return z;
}

std::vector<Tensor> grads_of(std::span<const ad::Var> vars) {
    std::vector<Tensor> out;
    out.reserve(vars.size());
    for (auto v : vars) out.push_back(v.grad());
    return out;
}

}  // namespace

double d_loss(const DiscriminatorNet& d, const Tensor& real_batch, const Tensor& fake_batch) {
    require_batch(real_batch, "real");
    require_batch(fake_batch, "fake");
    ad::Tape tape;
    auto params = d.net().bind(tape, false);
    return discriminator_loss(tape, d.net(), params, real_batch, fake_batch).value().item();
}

double g_loss(const DiscriminatorNet& d, const Tensor& fake_batch) {
    require_batch(fake_batch, "fake");
    ad::Tape tape;
    auto params = d.net().bind(tape, false);
    ad::Var p = d.net().forward(params, tape.constant(fake_batch));
    return ad::binary_cross_entropy(p, 1.0).value().item();
}

GanResult train_gan(const Tensor& pool, const GanConfig& config) {
    config.validate();
    if (pool.rank() != 2) throw DimensionError("GAN pool must be [size, dim], got " + shape_string(pool.shape()));
    const std::size_t n = pool.dim(0), dim = pool.dim(1);
    if (n < config.batch_size)
        throw ConfigError("pool of " + std::to_string(n) + " instances is smaller than batch size " +
                              std::to_string(config.batch_size),
                          "gan_batch_size");

    const Rng root(config.seed);
    GanResult result{
        GeneratorNet::create(config.latent_dim, config.generator_hidden, dim, root.split("generator-init").next_u64()),
        DiscriminatorNet::create(dim, config.discriminator_hidden, root.split("discriminator-init").next_u64()),
        {}};
    Rng shuffle_rng = root.split("shuffle");
    Rng latent_rng = root.split("latent");

    OptimizerState d_opt(config.optimizer);
    OptimizerState g_opt(config.optimizer);
    Mlp& g = result.generator.net();
    Mlp& d = result.discriminator.net();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batches = n / config.batch_size;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        double d_total = 0.0, g_total = 0.0;

        for (std::size_t b = 0; b < batches; ++b) {
            const Tensor real = gather_rows(pool, std::span(order).subspan(b * config.batch_size, config.batch_size));

            for (std::size_t s = 0; s < config.d_steps; ++s) {
                const Tensor fake = g.forward(latent_batch(config.batch_size, config.latent_dim, latent_rng));
                ad::Tape tape;
                auto d_params = d.bind(tape, true);
                ad::Var loss = discriminator_loss(tape, d, d_params, real, fake);
                tape.backward(loss);
                const auto grads = grads_of(d_params);
                d_opt.step(d.params(), grads);
                if (s + 1 == config.d_steps) d_total += loss.value().item();
            }

            ad::Tape tape;
            auto g_params = g.bind(tape, true);
            auto d_params = d.bind(tape, false);
            ad::Var z = tape.constant(latent_batch(config.batch_size, config.latent_dim, latent_rng));
            ad::Var p_fake = d.forward(d_params, g.forward(g_params, z));
            ad::Var loss = ad::binary_cross_entropy(p_fake, 1.0);
            tape.backward(loss);
            const auto grads = grads_of(g_params);
            g_opt.step(g.params(), grads);
            g_total += loss.value().item();
        }
        result.history.push_back({epoch, d_total / static_cast<double>(batches), g_total / static_cast<double>(batches)});
    }
    return result;
}

void write_loss_history_csv(std::ostream& out, const std::vector<EpochLoss>& history) {
    const auto old_precision = out.precision(17);
    out << "epoch,d_loss,g_loss\n";
    for (const auto& row : history) out << row.epoch << ',' << row.d_loss << ',' << row.g_loss << '\n';
    out.precision(old_precision);
}

}  // namespace gaal
