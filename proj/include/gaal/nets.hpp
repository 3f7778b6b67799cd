#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gaal/autodiff.hpp"
#include "gaal/rng.hpp"
#include "gaal/tensor.hpp"

namespace gaal {

enum class Activation : std::uint32_t { Identity = 0, Relu = 1, LeakyRelu = 2, Tanh = 3, Sigmoid = 4 };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

struct LayerSpec {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation activation = Activation::Identity;

    bool operator==(const LayerSpec&) const = default;
};

/// Fully connected feed-forward network. Parameters are stored as
/// [W0, b0, W1, b1, ...] with W_i of shape [out, in] and b_i of shape [out].
class Mlp {
public:
    Mlp() = default;
    /// Throws ConfigError (field "layers") when consecutive dims do not chain.
    Mlp(std::vector<LayerSpec> specs, std::vector<Tensor> params);

    /// Weights ~ Normal(0, 0.02), biases zero; deterministic per seed.
    static Mlp init(std::vector<LayerSpec> specs, std::uint64_t seed);

    const std::vector<LayerSpec>& specs() const noexcept { return specs_; }
    const std::vector<Tensor>& params() const noexcept { return params_; }
    std::vector<Tensor>& params() noexcept { return params_; }
    std::size_t input_dim() const { return specs_.front().in; }
    std::size_t output_dim() const { return specs_.back().out; }
    std::size_t parameter_count() const;

    /// Plain evaluation of x [in] or [batch, in]; no tape involved.
    Tensor forward(const Tensor& x) const;

    /// Registers the parameters on `tape` (in declaration order).
    std::vector<ad::Var> bind(ad::Tape& tape, bool requires_grad) const;
    /// Records the forward pass on the tape of `x`, using previously bound parameters.
    ad::Var forward(std::span<const ad::Var> params, ad::Var x) const;

    bool operator==(const Mlp&) const = default;

private:
    std::vector<LayerSpec> specs_;
    std::vector<Tensor> params_;
};

inline constexpr double kWeightInitStddev = 0.02;

/// Generator G: latent code z in R^latent -> instance in [-1, 1]^out.
/// The final layer's activation is always tanh.
class GeneratorNet {
public:
    GeneratorNet() = default;
    explicit GeneratorNet(Mlp net);

    static GeneratorNet create(std::size_t latent_dim, std::vector<std::size_t> hidden, std::size_t output_dim,
                               std::uint64_t seed);

    std::size_t latent_dim() const { return net_.input_dim(); }
    std::size_t output_dim() const { return net_.output_dim(); }
    const Mlp& net() const noexcept { return net_; }
    Mlp& net() noexcept { return net_; }

    bool operator==(const GeneratorNet&) const = default;

private:
    Mlp net_;
};

/// Discriminator D: instance -> probability of being real, strictly inside (0,1).
/// The final layer maps to one unit through a sigmoid.
class DiscriminatorNet {
public:
    DiscriminatorNet() = default;
    explicit DiscriminatorNet(Mlp net);

    static DiscriminatorNet create(std::size_t input_dim, std::vector<std::size_t> hidden, std::uint64_t seed);

    std::size_t input_dim() const { return net_.input_dim(); }
    const Mlp& net() const noexcept { return net_; }
    Mlp& net() noexcept { return net_; }

    bool operator==(const DiscriminatorNet&) const = default;

private:
    Mlp net_;
};

/// x = G(z) for one latent vector [latent] or a batch [count, latent].
Tensor generator_forward(const GeneratorNet& g, const Tensor& z);
/// D(x) for a single instance.
double discriminator_forward(const DiscriminatorNet& d, const Tensor& x);
/// D(x) for each row of a batch [count, dim]; returns [count].
Tensor discriminator_forward_batch(const DiscriminatorNet& d, const Tensor& batch);

/// `count` latent vectors with i.i.d. uniform [-1, 1] entries.
std::vector<Tensor> sample_latent(std::size_t latent_dim, std::size_t count, std::uint64_t seed);
std::vector<Tensor> sample_latent(std::size_t latent_dim, std::size_t count, Rng& rng);

/// Checkpoint container: "GAALNET1", u32 layer count, per layer (u32 in,
/// u32 out, u32 activation), then every parameter as little-endian float64.
std::vector<std::uint8_t> serialize_network(const Mlp& net);
Mlp deserialize_network(std::span<const std::uint8_t> bytes);
void save_network(const std::filesystem::path& path, const Mlp& net);
Mlp load_network(const std::filesystem::path& path);

}  // namespace gaal
