#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaal/classifier.hpp"
#include "gaal/data.hpp"
#include "gaal/nets.hpp"
#include "gaal/rng.hpp"
#include "gaal/synth.hpp"

namespace gaal {

enum class StrategyKind { Gaal, SimpleGan, SvmActive, Random, Supervised, Mixed };

/// Config spelling: gaal | simple_gan | svm_active | random | supervised | mixed.
std::string_view strategy_name(StrategyKind kind);
StrategyKind parse_strategy(std::string_view name);
bool is_synthesis(StrategyKind kind);

/// Unlabeled pool P. Labels, when present, are hidden from strategies and only
/// surface through an oracle. Instances once queried never become available again.
class Pool {
public:
    Pool() = default;
    explicit Pool(std::vector<Tensor> instances, std::optional<std::vector<int>> hidden_labels = std::nullopt);
    static Pool from(const Dataset& ds);

    std::size_t size() const noexcept { return instances_.size(); }
    std::size_t available_count() const noexcept { return available_count_; }
    bool available(std::size_t i) const { return mask_.at(i); }
    const std::vector<bool>& mask() const noexcept { return mask_; }
    const Tensor& instance(std::size_t i) const { return instances_.at(i); }
    const std::vector<Tensor>& instances() const noexcept { return instances_; }
    const std::optional<std::vector<int>>& hidden_labels() const noexcept { return hidden_labels_; }

    /// Throws ContractError if `i` was already taken.
    void take(std::size_t i);

private:
    std::vector<Tensor> instances_;
    std::optional<std::vector<int>> hidden_labels_;
    std::vector<bool> mask_;
    std::size_t available_count_ = 0;
};

struct QueryItem {
    Tensor x;
    std::optional<std::size_t> pool_index;  // pool strategies
    std::optional<Tensor> latent;           // synthesis strategies
    std::optional<double> objective;        // |f(x)| at selection time, when computed
    std::optional<std::size_t> restart;     // GAAL restart that produced the item
};

struct QueryBatch {
    std::vector<QueryItem> items;
    StrategyKind strategy = StrategyKind::Random;
    std::size_t iteration = 0;
    bool truncated = false;  // fewer items than requested (pool exhausted)

    std::size_t size() const noexcept { return items.size(); }
};

/// k distinct available indices, uniformly without replacement. Each pick
/// draws one position among the available indices in ascending order, so k
/// picks in one call equal the same picks spread over several calls.
QueryBatch select_random(Pool& pool, std::size_t k, Rng& rng);
QueryBatch select_random(Pool& pool, std::size_t k, std::uint64_t seed);

/// The k available instances with the smallest |f(x)|, ties by lower index.
QueryBatch select_svm_active(const LinearClassifier& clf, Pool& pool, std::size_t k);

/// k decodes of fresh uniform latent codes, no optimization.
QueryBatch select_simple_gan(const GeneratorNet& g, std::size_t k, Rng& rng);
QueryBatch select_simple_gan(const GeneratorNet& g, std::size_t k, std::uint64_t seed);

/// GAAL synthesis wrapped as a batch (see synthesize_queries).
QueryBatch select_gaal(const LinearClassifier& clf, const GeneratorNet& g, std::size_t k, const SynthConfig& config);

/// Random exactly when iteration % 6 == 5, GAAL otherwise.
StrategyKind mixed_schedule(std::size_t iteration);

}  // namespace gaal
