#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gaal/classifier.hpp"
#include "gaal/nets.hpp"
#include "gaal/tensor.hpp"

namespace gaal {

struct SynthConfig {
    std::size_t steps = 100;        // momentum steps per restart
    std::size_t restarts = 0;       // 0 means 3 * k
    double learning_rate = 0.05;
    double momentum = 0.9;
    double diversity_weight = 0.0;  // 0 disables the diversity term
    double diversity_sigma = 1.0;
    bool record_trajectory = false;
    std::uint64_t seed = 0;

    std::size_t restarts_for(std::size_t k) const { return restarts == 0 ? 3 * k : restarts; }
    void validate() const;
};

struct SynthesizedQuery {
    Tensor z;                        // best latent code found in this restart
    Tensor x;                        // G(z)
    double objective_value = 0.0;    // |f(G(z))|
    double penalized_objective = 0.0;  // objective including the diversity term
    double initial_objective = 0.0;  // objective at the restart's starting point
    std::size_t restart_index = 0;
    std::vector<double> trajectory;  // objective at every evaluated iterate, if recorded
};

/// |W . G(z) + b|, the distance proxy to the decision boundary.
double gaal_objective(const LinearClassifier& clf, const GeneratorNet& g, const Tensor& z);
/// |W . G(z) + b| + weight * diversity_penalty(G(z), prior, sigma).
double gaal_objective(const LinearClassifier& clf, const GeneratorNet& g, const Tensor& z,
                      std::span<const Tensor> prior, double weight, double sigma);

/// d objective / dz by back-propagation through G; sign(0) is taken as 0.
Tensor gaal_gradient(const LinearClassifier& clf, const GeneratorNet& g, const Tensor& z);
Tensor gaal_gradient(const LinearClassifier& clf, const GeneratorNet& g, const Tensor& z,
                     std::span<const Tensor> prior, double weight, double sigma);

/// sum_j exp(-|candidate - prior_j|^2 / (2 sigma^2)); 0 for an empty prior set.
double diversity_penalty(const Tensor& candidate, std::span<const Tensor> prior, double sigma = 1.0);

/// Runs `config.restarts_for(k)` momentum descents from fresh uniform z0,
/// keeps each restart's best iterate and returns the k restarts with the
/// lowest objective (ties by restart index), best first.
/// Throws ConfigError when fewer restarts than k are configured.
std::vector<SynthesizedQuery> synthesize_queries(const LinearClassifier& clf, const GeneratorNet& g, std::size_t k,
                                                 const SynthConfig& config);

}  // namespace gaal
