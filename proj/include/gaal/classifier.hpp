#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gaal/data.hpp"
#include "gaal/tensor.hpp"

namespace gaal {

/// Training data S for the learner. Labels are -1 or +1.
struct LabeledSet {
    std::vector<Tensor> instances;
    std::vector<int> labels;

    std::size_t size() const noexcept { return instances.size(); }
    bool empty() const noexcept { return instances.empty(); }
    void add(Tensor x, int label);

    static LabeledSet from(const Dataset& ds);
};

enum class SvmSolver {
    /// Dual decomposition (SMO pairs with second-order working-set selection).
    /// Reaches the optimum of the primal objective to solver tolerance.
    Dual,
    /// Averaged Pegasos stochastic subgradient, step 1/(lambda t).
    Pegasos,
};

struct SvmConfig {
    double lambda = 0.001;
    SvmSolver solver = SvmSolver::Dual;
    double tolerance = 1e-7;              // dual: KKT violation threshold
    std::size_t max_iterations = 5'000'000;
    std::size_t epochs = 200;             // pegasos passes over S
    std::uint64_t seed = 0;               // pegasos sampling order

    void validate() const;
};

/// f(x) = W . x + b with the identity feature map.
class LinearClassifier {
public:
    LinearClassifier() = default;
    LinearClassifier(Tensor weights, double bias);

    const Tensor& weights() const noexcept { return weights_; }
    double bias() const noexcept { return bias_; }
    std::size_t feature_dim() const noexcept { return weights_.numel(); }

    bool operator==(const LinearClassifier&) const = default;

private:
    Tensor weights_{Shape{1}, 0.0};
    double bias_ = 0.0;
};

/// Minimizes lambda/2 |W|^2 + mean_i max(0, 1 - y_i (W.x_i + b)).
/// A single-class S yields W = 0, b = that label. Empty S is a ContractError.
LinearClassifier svm_train(const LabeledSet& s, const SvmConfig& config = {});

double svm_objective(const LinearClassifier& clf, const LabeledSet& s, double lambda);

struct ObjectiveSubgradient {
    Tensor weights;
    double bias = 0.0;
};
/// A subgradient of svm_objective; the exact gradient away from hinge kinks.
ObjectiveSubgradient svm_objective_subgradient(const LinearClassifier& clf, const LabeledSet& s, double lambda);

double decision_value(const LinearClassifier& clf, std::span<const double> x);
inline double decision_value(const LinearClassifier& clf, const Tensor& x) { return decision_value(clf, x.data()); }
/// sign(decision_value) with ties going to +1.
int predict(const LinearClassifier& clf, std::span<const double> x);
inline int predict(const LinearClassifier& clf, const Tensor& x) { return predict(clf, x.data()); }
/// Fraction of correct predictions; an empty set is a ContractError.
double accuracy(const LinearClassifier& clf, const Dataset& test);
double accuracy(const LinearClassifier& clf, const LabeledSet& test);

/// "GAALSVM1", u32 feature dim, W entries, b (little-endian float64).
std::vector<std::uint8_t> serialize_classifier(const LinearClassifier& clf);
LinearClassifier deserialize_classifier(std::span<const std::uint8_t> bytes);
void save_classifier(const std::filesystem::path& path, const LinearClassifier& clf);
LinearClassifier load_classifier(const std::filesystem::path& path);

}  // namespace gaal
