#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "gaal/config.hpp"
#include "gaal/errors.hpp"
#include "gaal/harness.hpp"
#include "gaal/oracle.hpp"

namespace gaal {

enum class Phase { TrainingGan, AwaitingLabels, Retraining, Done };

/// "training-gan" | "awaiting-labels" | "retraining" | "done"
std::string_view phase_name(Phase phase);

/// Errors the HTTP layer maps to status codes.
class NotFoundError : public Error {
public:
    using Error::Error;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

struct PendingView {
    std::string query_id;
    std::size_t iteration = 0;
    std::string image_png_base64;  // grayscale, denormalized
    std::size_t image_width = 0;
    std::size_t image_height = 0;
};

struct SessionState {
    std::string session_id;
    Phase phase = Phase::TrainingGan;
    std::size_t labeled_count = 0;
    std::size_t skipped_count = 0;
    std::size_t budget = 0;
    std::size_t budget_remaining = 0;
    LearningCurve curve;
    std::optional<std::string> error;  // set when the worker failed; phase is then done
};

struct LabelAck {
    std::vector<std::string> applied;
    std::vector<Rejection> rejected;
    Phase phase = Phase::AwaitingLabels;
};

struct ServiceOptions {
    /// Event logs go to <state_dir>/<session id>.jsonl. Empty disables persistence.
    std::filesystem::path state_dir;
    /// Run GAN training and retraining on a worker thread. When false they run
    /// inside the calling request (useful for replay and deterministic tests).
    bool background = true;
};

class Session;

/// Live human-oracle sessions. Thread-safe; each session serializes its own
/// mutations while reads return the last published snapshot.
class LabelingService {
public:
    explicit LabelingService(ServiceOptions options = {});
    ~LabelingService();
    LabelingService(const LabelingService&) = delete;
    LabelingService& operator=(const LabelingService&) = delete;

    /// Throws ConfigError (with the offending field) for invalid configs or a
    /// non-human oracle.
    std::string create_session(const ExperimentConfig& config);
    std::vector<PendingView> get_pending(const std::string& session_id) const;
    /// Throws ConflictError outside awaiting-labels. Unknown or repeated ids are
    /// listed in `rejected` and change nothing.
    LabelAck post_labels(const std::string& session_id, const std::vector<OracleResponse>& responses);
    SessionState get_state(const std::string& session_id) const;
    /// labeled_count,accuracy rows of the curve so far.
    std::string curve_csv(const std::string& session_id) const;

    /// Blocks until the session leaves training-gan / retraining.
    void wait_idle(const std::string& session_id) const;
    std::vector<std::string> session_ids() const;

    /// Replays every event log under options.state_dir. Returns the ids restored.
    std::vector<std::string> restore();

private:
    std::shared_ptr<Session> find(const std::string& session_id) const;
    std::string fresh_id();

    ServiceOptions options_;
    mutable std::shared_mutex mutex_;
    std::vector<std::pair<std::string, std::shared_ptr<Session>>> sessions_;
    std::uint64_t id_state_;
};

/// Parses a POST /sessions body: {"config": "<key=value text>"} or
/// {"config": {"key": value, ...}}, or the key=value text itself.
ExperimentConfig parse_session_request(const std::string& body);

/// HTTP front end over a LabelingService.
class LabelingServer {
public:
    explicit LabelingServer(LabelingService& service);
    ~LabelingServer();
    LabelingServer(const LabelingServer&) = delete;
    LabelingServer& operator=(const LabelingServer&) = delete;

    /// Binds to `host`:`port` (port 0 picks a free one) and returns the port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void serve();
    void stop();

    /// GAAL_BIND, or 127.0.0.1 when unset.
    static std::string default_bind_address();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace gaal
