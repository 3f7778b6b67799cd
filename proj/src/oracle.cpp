#include "gaal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaal/errors.hpp"

namespace gaal {

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Negative: return "-1";
        case Verdict::Skip: return "skip";
        case Verdict::Positive: return "+1";
    }
    return "?";
}

Verdict parse_verdict(std::string_view text) {
    if (text == "+1" || text == "1" || text == "a" || text == "A" || text == "pos") return Verdict::Positive;
    if (text == "-1" || text == "b" || text == "B" || text == "neg") return Verdict::Negative;
    if (text == "skip" || text == "s" || text == "S") return Verdict::Skip;
    throw ContractError("unrecognized verdict '" + std::string(text) + "'");
}

OracleResponse ground_truth_label(const LabelingFunction& f, std::span<const double> x, std::string query_id) {
    return {std::move(query_id), f(x) >= 0.0 ? Verdict::Positive : Verdict::Negative};
}

OracleResponse nn_label(const LabeledSet& reference, double skip_radius, std::span<const double> x,
                        std::string query_id) {
    if (reference.empty()) throw ContractError("nearest-neighbor oracle needs a non-empty reference set");
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d2 = squared_distance(reference.instances[i].data(), x);
        if (d2 < best_d2) best_d2 = d2, best = i;
    }
    if (std::sqrt(best_d2) > skip_radius) return {std::move(query_id), Verdict::Skip};
    return {std::move(query_id), reference.labels[best] > 0 ? Verdict::Positive : Verdict::Negative};
}

double default_skip_radius(const LabeledSet& reference, double percentile, std::size_t max_probes) {
    const std::size_t n = reference.size();
    if (n < 2) return std::numeric_limits<double>::infinity();
    std::vector<std::size_t> probes;
    if (max_probes == 0 || max_probes >= n) {
        for (std::size_t i = 0; i < n; ++i) probes.push_back(i);
    } else {
        for (std::size_t p = 0; p < max_probes; ++p) probes.push_back(p * n / max_probes);
    }
    std::vector<double> nearest;
    nearest.reserve(probes.size());
    for (std::size_t i : probes) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) best = std::min(best, squared_distance(reference.instances[i].data(), reference.instances[j].data()));
        nearest.push_back(std::sqrt(best));
    }
    std::sort(nearest.begin(), nearest.end());
    const std::size_t m = nearest.size();
    const double pos = std::clamp(percentile, 0.0, 1.0) * static_cast<double>(m - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, m - 1);
    return nearest[lo] + (pos - static_cast<double>(lo)) * (nearest[hi] - nearest[lo]);
}

bool is_programmatic(const Oracle& oracle) { return !std::holds_alternative<HumanOracle>(oracle); }

Verdict ask(const Oracle& oracle, std::span<const double> x) {
    if (const auto* gt = std::get_if<GroundTruthOracle>(&oracle)) return ground_truth_label(gt->f, x).verdict;
    if (const auto* nn = std::get_if<NearestNeighborOracle>(&oracle))
        return nn_label(nn->reference, nn->skip_radius, x).verdict;
    throw ContractError("a human oracle cannot be queried synchronously");
}

void PendingQueue::issue(const std::string& query_id) {
    if (issued_.contains(query_id)) throw ContractError("query id '" + query_id + "' issued twice");
    issued_.emplace(query_id, std::nullopt);
    pending_.emplace(query_id, true);
    order_.push_back(query_id);
}

ApplyResult PendingQueue::apply(std::span<const OracleResponse> responses) {
    ApplyResult result;
    for (const auto& r : responses) {
        auto it = issued_.find(r.query_id);
        if (it == issued_.end()) {
            result.rejected.push_back({r.query_id, "unknown"});
            continue;
        }
        if (it->second.has_value()) {
            result.rejected.push_back({r.query_id, "duplicate"});
            continue;
        }
        it->second = r.verdict;
        pending_.erase(r.query_id);
        result.applied.push_back(r);
    }
    return result;
}

std::vector<std::string> PendingQueue::pending_ids() const {
    std::vector<std::string> out;
    for (const auto& id : order_)
        if (pending_.contains(id)) out.push_back(id);
    return out;
}

std::optional<Verdict> PendingQueue::verdict(const std::string& query_id) const {
    auto it = issued_.find(query_id);
    if (it == issued_.end()) return std::nullopt;
    return it->second;
}

void PendingQueue::clear() {
    order_.clear();
    issued_.clear();
    pending_.clear();
}

}  // namespace gaal
