#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "gaal/nets.hpp"
#include "gaal/optim.hpp"
#include "gaal/tensor.hpp"

namespace gaal {

struct GanConfig {
    std::size_t epochs = 300;
    std::size_t batch_size = 16;
    std::size_t d_steps = 1;  // discriminator updates per generator update
    std::size_t latent_dim = 8;
    std::vector<std::size_t> generator_hidden{32, 32};
    std::vector<std::size_t> discriminator_hidden{32, 32};
    OptimizerSettings optimizer = OptimizerSettings::adam(2e-4, 0.5, 0.999);
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochLoss {
    std::size_t epoch = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
};

struct GanResult {
    GeneratorNet generator;
    DiscriminatorNet discriminator;
    std::vector<EpochLoss> history;
};

/// -mean log D(real) - mean log(1 - D(fake)), probabilities clamped.
/// Batches are [count, dim]; either being empty is a ContractError.
double d_loss(const DiscriminatorNet& d, const Tensor& real_batch, const Tensor& fake_batch);
/// Non-saturating generator loss: -mean log D(fake).
double g_loss(const DiscriminatorNet& d, const Tensor& fake_batch);

/// Alternating minibatch training of D and G on the unlabeled pool
/// ([size, dim], entries in [-1,1]). Deterministic per config.seed.
/// Throws ConfigError when the pool holds fewer rows than one batch.
GanResult train_gan(const Tensor& pool, const GanConfig& config);

void write_loss_history_csv(std::ostream& out, const std::vector<EpochLoss>& history);

}  // namespace gaal
