#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gaal/classifier.hpp"
#include "gaal/tensor.hpp"

namespace gaal {

enum class Verdict : int { Negative = -1, Skip = 0, Positive = 1 };

std::string_view verdict_name(Verdict v);  // "-1", "skip", "+1"
/// Accepts "+1"/"1"/"a"/"pos", "-1"/"b"/"neg", "skip"/"s".
Verdict parse_verdict(std::string_view text);
inline bool is_skip(Verdict v) { return v == Verdict::Skip; }
inline int verdict_label(Verdict v) { return static_cast<int>(v); }

struct OracleResponse {
    std::string query_id;
    Verdict verdict = Verdict::Skip;

    bool operator==(const OracleResponse&) const = default;
};

using LabelingFunction = std::function<double(std::span<const double>)>;

/// sign(f(x)) with f(x) == 0 mapped to +1; never skips.
OracleResponse ground_truth_label(const LabelingFunction& f, std::span<const double> x, std::string query_id = {});

/// Label of the nearest reference point (Euclidean, ties to the lowest index),
/// or skip when that point is farther than `skip_radius`.
OracleResponse nn_label(const LabeledSet& reference, double skip_radius, std::span<const double> x,
                        std::string query_id = {});

/// 95th percentile (linear interpolation) of each reference point's distance
/// to its nearest other reference point. Infinity for fewer than two points.
/// With `max_probes` > 0 only an evenly strided subset of that many points is
/// probed (each still against the full set).
double default_skip_radius(const LabeledSet& reference, double percentile = 0.95, std::size_t max_probes = 0);

struct GroundTruthOracle {
    LabelingFunction f;
};

struct NearestNeighborOracle {
    LabeledSet reference;
    double skip_radius = 0.0;
};

struct HumanOracle {};

using Oracle = std::variant<GroundTruthOracle, NearestNeighborOracle, HumanOracle>;

bool is_programmatic(const Oracle& oracle);
/// Verdict from a programmatic oracle. Throws ContractError for a human oracle.
Verdict ask(const Oracle& oracle, std::span<const double> x);

struct Rejection {
    std::string query_id;
    std::string reason;  // "unknown" or "duplicate"
};

struct ApplyResult {
    std::vector<OracleResponse> applied;
    std::vector<Rejection> rejected;
};

/// Outstanding queries awaiting a human verdict. Each id resolves once;
/// later responses for it are rejected and leave the first verdict intact.
/// Not internally synchronized: the owning session serializes access.
class PendingQueue {
public:
    void issue(const std::string& query_id);
    ApplyResult apply(std::span<const OracleResponse> responses);

    std::vector<std::string> pending_ids() const;
    std::size_t pending_count() const noexcept { return pending_.size(); }
    std::size_t issued_count() const noexcept { return issued_.size(); }
    std::optional<Verdict> verdict(const std::string& query_id) const;
    bool knows(const std::string& query_id) const { return issued_.contains(query_id); }
    void clear();

private:
    std::vector<std::string> order_;
    std::map<std::string, std::optional<Verdict>> issued_;
    std::map<std::string, bool> pending_;
};

}  // namespace gaal
