#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gaal/tensor.hpp"

namespace gaal {

enum class OptimizerKind { SgdMomentum, Adam };

struct OptimizerSettings {
    OptimizerKind kind = OptimizerKind::SgdMomentum;
    double learning_rate = 0.01;
    double momentum = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static OptimizerSettings sgd(double learning_rate, double momentum = 0.0);
    static OptimizerSettings adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                                  double epsilon = 1e-8);
    void validate() const;
};

/// Per-parameter buffers for one optimizer. Buffers are shaped on the first
/// step and must keep matching the parameters afterwards.
///
///   sgd-momentum: v <- mu * v + g;  theta <- theta - lr * v
///   adam:         bias-corrected first/second moments (Kingma & Ba)
class OptimizerState {
public:
    explicit OptimizerState(OptimizerSettings settings);

    void step(std::span<Tensor> params, std::span<const Tensor> grads);

    const OptimizerSettings& settings() const noexcept { return settings_; }
    std::size_t steps_taken() const noexcept { return steps_; }
    const std::vector<Tensor>& first_moments() const noexcept { return first_; }
    const std::vector<Tensor>& second_moments() const noexcept { return second_; }

private:
    OptimizerSettings settings_;
    std::vector<Tensor> first_;
    std::vector<Tensor> second_;
    std::size_t steps_ = 0;
};

}  // namespace gaal
