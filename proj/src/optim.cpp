#include "gaal/optim.hpp"

#include <cmath>
#include <string>

#include "gaal/errors.hpp"

namespace gaal {

OptimizerSettings OptimizerSettings::sgd(double learning_rate, double momentum) {
    OptimizerSettings s;
    s.kind = OptimizerKind::SgdMomentum;
    s.learning_rate = learning_rate;
    s.momentum = momentum;
    s.validate();
    return s;
}

OptimizerSettings OptimizerSettings::adam(double learning_rate, double beta1, double beta2, double epsilon) {
    OptimizerSettings s;
    s.kind = OptimizerKind::Adam;
    s.learning_rate = learning_rate;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.epsilon = epsilon;
    s.validate();
    return s;
}

void OptimizerSettings::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive", "learning_rate");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0,1)", "momentum");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0,1)", "beta1");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0,1)", "beta2");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive", "epsilon");
}

OptimizerState::OptimizerState(OptimizerSettings settings) : settings_(settings) { settings_.validate(); }

void OptimizerState::step(std::span<Tensor> params, std::span<const Tensor> grads) {
    if (params.size() != grads.size())
        throw DimensionError("optimizer got " + std::to_string(params.size()) + " parameters and " +
                             std::to_string(grads.size()) + " gradients");
    if (first_.empty()) {
        for (const auto& p : params) {
            first_.emplace_back(p.shape(), 0.0);
            if (settings_.kind == OptimizerKind::Adam) second_.emplace_back(p.shape(), 0.0);
        }
    }
    if (first_.size() != params.size())
        throw DimensionError("optimizer state tracks " + std::to_string(first_.size()) + " parameters, got " +
                             std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        require_same_shape(params[i], grads[i], "optimizer parameter/gradient");
        require_same_shape(params[i], first_[i], "optimizer parameter/buffer");
    }

    ++steps_;
    const double lr = settings_.learning_rate;
    if (settings_.kind == OptimizerKind::SgdMomentum) {
        const double mu = settings_.momentum;
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto v = first_[i].data();
            auto p = params[i].data();
            auto g = grads[i].data();
            for (std::size_t j = 0; j < p.size(); ++j) {
                v[j] = mu * v[j] + g[j];
                p[j] -= lr * v[j];
            }
        }
        return;
    }

    const double b1 = settings_.beta1, b2 = settings_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto m = first_[i].data();
        auto v = second_[i].data();
        auto p = params[i].data();
        auto g = grads[i].data();
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            const double m_hat = m[j] / correction1;
            const double v_hat = v[j] / correction2;
            p[j] -= lr * m_hat / (std::sqrt(v_hat) + settings_.epsilon);
        }
    }
}

}  // namespace gaal
