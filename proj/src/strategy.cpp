#include "gaal/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gaal/errors.hpp"

namespace gaal {

std::string_view strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Gaal: return "gaal";
        case StrategyKind::SimpleGan: return "simple_gan";
        case StrategyKind::SvmActive: return "svm_active";
        case StrategyKind::Random: return "random";
        case StrategyKind::Supervised: return "supervised";
        case StrategyKind::Mixed: return "mixed";
    }
    return "?";
}

StrategyKind parse_strategy(std::string_view name) {
    for (auto k : {StrategyKind::Gaal, StrategyKind::SimpleGan, StrategyKind::SvmActive, StrategyKind::Random,
                   StrategyKind::Supervised, StrategyKind::Mixed})
        if (name == strategy_name(k)) return k;
    throw ConfigError("unknown strategy '" + std::string(name) +
                          "' (expected gaal, simple_gan, svm_active, random, supervised or mixed)",
                      "strategy");
}

bool is_synthesis(StrategyKind kind) {
    return kind == StrategyKind::Gaal || kind == StrategyKind::SimpleGan || kind == StrategyKind::Mixed;
}

Pool::Pool(std::vector<Tensor> instances, std::optional<std::vector<int>> hidden_labels)
    : instances_(std::move(instances)), hidden_labels_(std::move(hidden_labels)), mask_(instances_.size(), true),
      available_count_(instances_.size()) {
    if (hidden_labels_ && hidden_labels_->size() != instances_.size())
        throw ContractError("pool has " + std::to_string(instances_.size()) + " instances but " +
                            std::to_string(hidden_labels_->size()) + " hidden labels");
}

Pool Pool::from(const Dataset& ds) { return Pool(ds.instances, ds.labels); }

void Pool::take(std::size_t i) {
    if (!mask_.at(i)) throw ContractError("pool instance " + std::to_string(i) + " was already queried");
    mask_[i] = false;
    --available_count_;
}

QueryBatch select_random(Pool& pool, std::size_t k, Rng& rng) {
    QueryBatch batch;
    batch.strategy = StrategyKind::Random;
    if (k > pool.available_count()) {
        batch.truncated = true;
        k = pool.available_count();
    }
    std::vector<std::size_t> open;
    open.reserve(pool.available_count());
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (pool.available(i)) open.push_back(i);
    for (std::size_t pick = 0; pick < k; ++pick) {
        const std::size_t pos = rng.below(open.size());
        const std::size_t idx = open[pos];
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(pos));
        pool.take(idx);
        batch.items.push_back({pool.instance(idx), idx, std::nullopt, std::nullopt, std::nullopt});
    }
    return batch;
}

QueryBatch select_random(Pool& pool, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    return select_random(pool, k, rng);
}

QueryBatch select_svm_active(const LinearClassifier& clf, Pool& pool, std::size_t k) {
    if (pool.available_count() == 0) throw ContractError("svm_active selection on an exhausted pool");
    QueryBatch batch;
    batch.strategy = StrategyKind::SvmActive;
    if (k > pool.available_count()) {
        batch.truncated = true;
        k = pool.available_count();
    }
    struct Scored {
        double margin;
        std::size_t index;
    };
    std::vector<Scored> scored;
    scored.reserve(pool.available_count());
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (pool.available(i)) scored.push_back({std::fabs(decision_value(clf, pool.instance(i))), i});
    auto closer = [](const Scored& a, const Scored& b) {
        return a.margin < b.margin || (a.margin == b.margin && a.index < b.index);
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), closer);
    for (std::size_t i = 0; i < k; ++i) {
        pool.take(scored[i].index);
        batch.items.push_back(
            {pool.instance(scored[i].index), scored[i].index, std::nullopt, scored[i].margin, std::nullopt});
    }
    return batch;
}

QueryBatch select_simple_gan(const GeneratorNet& g, std::size_t k, Rng& rng) {
    QueryBatch batch;
    batch.strategy = StrategyKind::SimpleGan;
    for (auto& z : sample_latent(g.latent_dim(), k, rng)) {
        Tensor x = generator_forward(g, z);
        batch.items.push_back({std::move(x), std::nullopt, std::move(z), std::nullopt, std::nullopt});
    }
    return batch;
}

QueryBatch select_simple_gan(const GeneratorNet& g, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    return select_simple_gan(g, k, rng);
}

QueryBatch select_gaal(const LinearClassifier& clf, const GeneratorNet& g, std::size_t k, const SynthConfig& config) {
    QueryBatch batch;
    batch.strategy = StrategyKind::Gaal;
    for (auto& q : synthesize_queries(clf, g, k, config))
        batch.items.push_back({std::move(q.x), std::nullopt, std::move(q.z), q.objective_value, q.restart_index});
    return batch;
}

StrategyKind mixed_schedule(std::size_t iteration) {
    return iteration % 6 == 5 ? StrategyKind::Random : StrategyKind::Gaal;
}

}  // namespace gaal
