#include "gaal/labsrv.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "gaal/image.hpp"
#include "gaal/rng.hpp"
#include "httplib.h"
#include "json.hpp"

namespace gaal {

using json = nlohmann::json;

std::string_view phase_name(Phase phase) {
    switch (phase) {
        case Phase::TrainingGan: return "training-gan";
        case Phase::AwaitingLabels: return "awaiting-labels";
        case Phase::Retraining: return "retraining";
        case Phase::Done: return "done";
    }
    return "unknown";
}

namespace {

struct IssuedItem {
    PendingView view;
    Tensor x;
};

struct Snapshot {
    SessionState state;
    std::vector<PendingView> pending;
};

bool busy(Phase p) { return p == Phase::TrainingGan || p == Phase::Retraining; }

}  // namespace

/// One human-oracle active-learning loop. `mutex` serializes every mutation;
/// readers only touch the published snapshot.
class Session {
public:
    Session(std::string id, ExperimentConfig config) : id_(std::move(id)), config_(std::move(config)) {
        publish();
    }

    ~Session() {
        if (worker_.joinable()) worker_.join();
    }

    const std::string& id() const { return id_; }
    const ExperimentConfig& config() const { return config_; }

    void open_log(const std::filesystem::path& path, bool append) {
        log_.open(path, append ? std::ios::app : std::ios::trunc);
        if (!log_) throw Error("cannot open session log " + path.string());
    }

    void log_created() { log({{"event", "created"}, {"session_id", id_}, {"config", render_config(config_)}}); }

    std::shared_ptr<const Snapshot> snapshot() const {
        std::lock_guard lock(snap_mutex_);
        return snap_;
    }

    void wait_idle() const {
        std::unique_lock lock(snap_mutex_);
        idle_cv_.wait(lock, [&] { return !busy(snap_->state.phase); });
    }

    /// Loads data and the generator, labels the initial set and issues the
    /// first batch. Runs on the worker when `background`.
    void start(bool background) {
        std::lock_guard lock(mutex_);
        phase_ = Phase::TrainingGan;
        publish();
        if (background) {
            worker_ = std::thread([this] { guarded([this] { initialize(); }); });
        } else {
            guarded([this] { initialize(); }, false);
        }
    }

    LabelAck post(const std::vector<OracleResponse>& responses, bool background) {
        std::lock_guard lock(mutex_);
        if (phase_ != Phase::AwaitingLabels)
            throw ConflictError("session " + id_ + " is " + std::string(phase_name(phase_)) + ", not awaiting-labels");
        ApplyResult result = queue_.apply(responses);
        LabelAck ack;
        for (const auto& r : result.applied) {
            ack.applied.push_back(r.query_id);
            log({{"event", "verdict"}, {"query_id", r.query_id}, {"verdict", std::string(verdict_name(r.verdict))}});
        }
        ack.rejected = std::move(result.rejected);
        if (queue_.pending_count() == 0 && !batch_.empty()) {
            phase_ = Phase::Retraining;
            publish();
            if (background) {
                if (worker_.joinable()) worker_.join();
                worker_ = std::thread([this] { guarded([this] { complete_batch(); }); });
            } else {
                guarded([this] { complete_batch(); }, false);
            }
        } else {
            publish();
        }
        ack.phase = phase_;
        return ack;
    }

    /// Batches issued so far, in order; replay compares them against the log.
    const std::vector<std::vector<std::string>>& issued_batches() const { return issued_; }

private:
    void guarded(const std::function<void()>& work, bool take_lock = true) {
        std::unique_lock lock(mutex_, std::defer_lock);
        if (take_lock) lock.lock();
        try {
            work();
        } catch (const std::exception& e) {
            error_ = e.what();
            phase_ = Phase::Done;
            log({{"event", "failed"}, {"error", e.what()}});
        }
        publish();
    }

    void initialize() {
        const bool synth = is_synthesis(config_.strategy) || config_.strategy == StrategyKind::Mixed;
        experiment_ = prepare_experiment(config_, synth);
        pool_ = Pool::from(experiment_.pool);
        Rng root(config_.seeds.front());
        pool_rng_ = root.split("pool-selection");
        synth_rng_ = root.split("synthesis");

        const auto& hidden = pool_.hidden_labels();
        if (!hidden) throw ConfigError("human sessions seed S from pool labels; the pool has none", "dataset");
        for (const auto& item : select_random(pool_, config_.init_size, pool_rng_).items)
            labeled_.add(item.x, (*hidden)[*item.pool_index]);
        remaining_ = config_.budget - config_.init_size;
        retrain();
        issue_next();
    }

    void retrain() {
        if (labeled_.empty()) {
            clf_ = LinearClassifier(Tensor(Shape{experiment_.pool.feature_dim}, 0.0), 1.0);
            return;
        }
        clf_ = svm_train(labeled_, config_.svm);
        curve_.points.push_back({labeled_.size(), accuracy(clf_, experiment_.test)});
    }

    void issue_next() {
        batch_.clear();
        if (remaining_ == 0) return finish();
        const std::size_t k = std::min(config_.batch_size, remaining_);
        const StrategyKind kind = strategy_at(config_.strategy, iteration_);
        QueryBatch batch = acquire_batch(kind, config_, experiment_, clf_, pool_, pool_rng_, synth_rng_, iteration_, k);
        if (batch.items.empty()) return finish();

        std::vector<std::string> ids;
        for (auto& item : batch.items) {
            IssuedItem issued;
            issued.view.query_id = "q" + std::to_string(next_query_++);
            issued.view.iteration = iteration_;
            const ImageShape shape = image_shape_for(item.x.numel());
            issued.view.image_png_base64 = base64_encode(encode_png(to_gray_bytes(item.x), shape));
            issued.view.image_width = shape.cols;
            issued.view.image_height = shape.rows;
            issued.x = std::move(item.x);
            queue_.issue(issued.view.query_id);
            ids.push_back(issued.view.query_id);
            batch_.push_back(std::move(issued));
        }
        issued_.push_back(ids);
        log({{"event", "queries-issued"}, {"iteration", iteration_}, {"query_ids", ids}});
        phase_ = Phase::AwaitingLabels;
    }

    void complete_batch() {
        std::size_t added = 0;
        for (const auto& item : batch_) {
            const Verdict v = queue_.verdict(item.view.query_id).value();
            --remaining_;
            if (is_skip(v)) {
                ++skipped_;
            } else {
                labeled_.add(item.x, verdict_label(v));
                ++added;
            }
        }
        if (added > 0) retrain();
        json event{{"event", "retrained"},
                   {"iteration", iteration_},
                   {"labeled_count", labeled_.size()},
                   {"skipped_count", skipped_},
                   {"budget_remaining", remaining_}};
        if (added > 0) event["accuracy"] = curve_.points.back().accuracy;
        log(event);
        ++iteration_;
        issue_next();
    }

    void finish() {
        phase_ = Phase::Done;
        log({{"event", "done"}});
    }

    void log(const json& event) {
        if (log_.is_open()) log_ << event.dump() << '\n' << std::flush;
    }

    /// Caller holds mutex_.
    void publish() {
        auto snap = std::make_shared<Snapshot>();
        snap->state.session_id = id_;
        snap->state.phase = phase_;
        snap->state.labeled_count = labeled_.size();
        snap->state.skipped_count = skipped_;
        snap->state.budget = config_.budget;
        snap->state.budget_remaining = phase_ == Phase::TrainingGan ? config_.budget : remaining_;
        snap->state.curve = curve_;
        snap->state.curve.strategy = config_.strategy;
        snap->state.curve.seed = config_.seeds.front();
        snap->state.error = error_;
        if (phase_ == Phase::AwaitingLabels)
            for (const auto& item : batch_)
                if (!queue_.verdict(item.view.query_id)) snap->pending.push_back(item.view);
        {
            std::lock_guard lock(snap_mutex_);
            snap_ = std::move(snap);
        }
        idle_cv_.notify_all();
    }

    std::string id_;
    ExperimentConfig config_;

    std::mutex mutex_;
    mutable std::mutex snap_mutex_;
    mutable std::condition_variable idle_cv_;
    std::shared_ptr<const Snapshot> snap_;
    std::thread worker_;
    std::ofstream log_;

    Phase phase_ = Phase::TrainingGan;
    std::optional<std::string> error_;
    Experiment experiment_;
    Pool pool_;
    Rng pool_rng_{0};
    Rng synth_rng_{0};
    LabeledSet labeled_;
    LinearClassifier clf_;
    LearningCurve curve_;
    std::size_t remaining_ = 0;
    std::size_t skipped_ = 0;
    std::size_t iteration_ = 0;
    std::size_t next_query_ = 0;
    PendingQueue queue_;
    std::vector<IssuedItem> batch_;
    std::vector<std::vector<std::string>> issued_;
};

LabelingService::LabelingService(ServiceOptions options) : options_(std::move(options)) {
    std::random_device rd;
    id_state_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
                static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
    if (!options_.state_dir.empty()) std::filesystem::create_directories(options_.state_dir);
}

LabelingService::~LabelingService() = default;

std::string LabelingService::fresh_id() {
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(splitmix64(id_state_)));
    return buf;
}

std::shared_ptr<Session> LabelingService::find(const std::string& session_id) const {
    std::shared_lock lock(mutex_);
    for (const auto& [id, session] : sessions_)
        if (id == session_id) return session;
    throw NotFoundError("unknown session '" + session_id + "'");
}

std::string LabelingService::create_session(const ExperimentConfig& config) {
    config.validate();
    if (config.oracle != OracleKind::Human) throw ConfigError("labeling sessions need oracle=human", "oracle");
    if (config.strategy == StrategyKind::Supervised)
        throw ConfigError("supervised is a baseline, not an interactive strategy", "strategy");

    std::shared_ptr<Session> session;
    {
        std::unique_lock lock(mutex_);
        std::string id;
        do {
            id = fresh_id();
        } while (std::any_of(sessions_.begin(), sessions_.end(), [&](const auto& s) { return s.first == id; }));
        session = std::make_shared<Session>(id, config);
        sessions_.emplace_back(id, session);
    }
    if (!options_.state_dir.empty()) {
        session->open_log(options_.state_dir / (session->id() + ".jsonl"), false);
        session->log_created();
    }
    // A checkpointed generator makes setup cheap, so the caller sees awaiting-labels immediately.
    session->start(options_.background && config.gan_checkpoint.empty());
    return session->id();
}

std::vector<PendingView> LabelingService::get_pending(const std::string& session_id) const {
    return find(session_id)->snapshot()->pending;
}

LabelAck LabelingService::post_labels(const std::string& session_id, const std::vector<OracleResponse>& responses) {
    return find(session_id)->post(responses, options_.background);
}

SessionState LabelingService::get_state(const std::string& session_id) const {
    return find(session_id)->snapshot()->state;
}

std::string LabelingService::curve_csv(const std::string& session_id) const {
    std::ostringstream out;
    write_curve_csv(out, get_state(session_id).curve);
    return out.str();
}

void LabelingService::wait_idle(const std::string& session_id) const { find(session_id)->wait_idle(); }

std::vector<std::string> LabelingService::session_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> ids;
    for (const auto& s : sessions_) ids.push_back(s.first);
    return ids;
}

std::vector<std::string> LabelingService::restore() {
    std::vector<std::string> restored;
    if (options_.state_dir.empty() || !std::filesystem::exists(options_.state_dir)) return restored;
    std::vector<std::filesystem::path> logs;
    for (const auto& entry : std::filesystem::directory_iterator(options_.state_dir))
        if (entry.path().extension() == ".jsonl") logs.push_back(entry.path());
    std::sort(logs.begin(), logs.end());

    for (const auto& path : logs) {
        std::ifstream in(path);
        std::string line;
        std::vector<json> events;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                events.push_back(json::parse(line));
            } catch (const json::exception&) {
                break;  // torn final write; everything before it is intact
            }
        }
        if (events.empty() || events.front().value("event", "") != "created")
            throw FormatError(path.string() + ": event log does not start with a created event");
        const std::string id = events.front().at("session_id").get<std::string>();
        auto session = std::make_shared<Session>(id, parse_config(events.front().at("config").get<std::string>()));
        session->start(false);
        std::vector<std::vector<std::string>> logged;
        for (const auto& e : events) {
            const std::string kind = e.value("event", "");
            if (kind == "verdict") {
                OracleResponse r{e.at("query_id").get<std::string>(), parse_verdict(e.at("verdict").get<std::string>())};
                session->post({r}, false);
            } else if (kind == "queries-issued") {
                logged.push_back(e.at("query_ids").get<std::vector<std::string>>());
            }
        }
        const auto& replayed = session->issued_batches();
        if (replayed.size() < logged.size() || !std::equal(logged.begin(), logged.end(), replayed.begin()))
            throw FormatError(path.string() + ": replay issued different queries than the log records");
        session->open_log(path, true);
        {
            std::unique_lock lock(mutex_);
            sessions_.emplace_back(id, session);
        }
        restored.push_back(id);
    }
    return restored;
}

ExperimentConfig parse_session_request(const std::string& body) {
    const auto first = body.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || body[first] != '{') return parse_config(body);
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed JSON body: ") + e.what(), "body");
    }
    if (!doc.contains("config")) throw ConfigError("request body needs a config", "config");
    const json& cfg = doc["config"];
    if (cfg.is_string()) return parse_config(cfg.get<std::string>());
    if (!cfg.is_object()) throw ConfigError("config must be a string or an object", "config");
    std::map<std::string, std::string> pairs{{"config_version", std::to_string(kConfigVersion)}};
    for (const auto& [key, value] : cfg.items()) {
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_array()) {
            for (const auto& v : value) text += (text.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
        } else {
            text = value.dump();
        }
        pairs[key] = text;
    }
    return config_from_pairs(pairs);
}

namespace {

json state_json(const SessionState& s) {
    json curve = json::array();
    for (const auto& p : s.curve.points) curve.push_back({{"labeled_count", p.labeled_count}, {"accuracy", p.accuracy}});
    json out{{"session_id", s.session_id},
             {"phase", std::string(phase_name(s.phase))},
             {"labeled_count", s.labeled_count},
             {"skipped_count", s.skipped_count},
             {"budget", s.budget},
             {"budget_remaining", s.budget_remaining},
             {"curve", curve}};
    if (s.error) out["error"] = *s.error;
    return out;
}

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message, const std::string& field = {},
                 const std::vector<std::string>& rejected_ids = {}) {
    json body{{"error", message}};
    if (!field.empty()) body["field"] = field;
    if (!rejected_ids.empty()) body["rejected_ids"] = rejected_ids;
    reply(res, status, body);
}

std::vector<OracleResponse> parse_labels(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed JSON body: ") + e.what(), "body");
    }
    const json* list = &doc;
    if (doc.is_object()) {
        if (!doc.contains("responses")) throw ConfigError("body needs a responses array", "responses");
        list = &doc["responses"];
    }
    if (!list->is_array()) throw ConfigError("responses must be an array", "responses");
    std::vector<OracleResponse> out;
    for (const auto& item : *list) {
        if (!item.is_object() || !item.contains("query_id") || !item.contains("verdict"))
            throw ConfigError("each response needs query_id and verdict", "responses");
        const json& v = item["verdict"];
        std::string text = v.is_string() ? v.get<std::string>() : v.dump();
        if (text == "0") text = "skip";
        try {
            out.push_back({item["query_id"].get<std::string>(), parse_verdict(text)});
        } catch (const ContractError& e) {
            throw ConfigError(e.what(), "verdict");
        }
    }
    return out;
}

template <class F>
void with_errors(httplib::Response& res, F&& body) {
    try {
        body();
    } catch (const NotFoundError& e) {
        reply_error(res, 404, e.what());
    } catch (const ConflictError& e) {
        reply_error(res, 409, e.what());
    } catch (const ConfigError& e) {
        reply_error(res, 400, e.what(), e.field());
    } catch (const std::exception& e) {
        reply_error(res, 500, e.what());
    }
}

}  // namespace

struct LabelingServer::Impl {
    LabelingService& service;
    httplib::Server server;

    explicit Impl(LabelingService& s) : service(s) {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Headers", "Content-Type"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            with_errors(res, [&] {
                const std::string id = service.create_session(parse_session_request(req.body));
                const auto state = service.get_state(id);
                reply(res, 201, {{"session_id", id}, {"phase", std::string(phase_name(state.phase))}});
            });
        });

        server.Get(R"(/sessions/([^/]+)/pending)", [this](const httplib::Request& req, httplib::Response& res) {
            with_errors(res, [&] {
                const std::string id = req.matches[1];
                const auto state = service.get_state(id);
                json items = json::array();
                for (const auto& p : service.get_pending(id))
                    items.push_back({{"query_id", p.query_id},
                                     {"iteration", p.iteration},
                                     {"image", p.image_png_base64},
                                     {"image_format", "png"},
                                     {"width", p.image_width},
                                     {"height", p.image_height}});
                reply(res, 200, {{"session_id", id}, {"phase", std::string(phase_name(state.phase))}, {"items", items}});
            });
        });

        server.Post(R"(/sessions/([^/]+)/labels)", [this](const httplib::Request& req, httplib::Response& res) {
            with_errors(res, [&] {
                const std::string id = req.matches[1];
                service.get_state(id);  // 404 before body validation
                const auto ack = service.post_labels(id, parse_labels(req.body));
                json rejected = json::array();
                std::vector<std::string> rejected_ids;
                bool unknown = false;
                for (const auto& r : ack.rejected) {
                    rejected.push_back({{"query_id", r.query_id}, {"reason", r.reason}});
                    rejected_ids.push_back(r.query_id);
                    unknown = unknown || r.reason == "unknown";
                }
                json body{{"applied", ack.applied},
                          {"rejected", rejected},
                          {"phase", std::string(phase_name(ack.phase))}};
                if (ack.applied.empty() && !rejected_ids.empty()) {
                    std::string message = "rejected query ids:";
                    for (const auto& r : rejected_ids) message += " " + r;
                    body["error"] = message;
                    body["rejected_ids"] = rejected_ids;
                    reply(res, unknown ? 400 : 409, body);
                    return;
                }
                reply(res, 200, body);
            });
        });

        server.Get(R"(/sessions/([^/]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
            with_errors(res, [&] { reply(res, 200, state_json(service.get_state(req.matches[1]))); });
        });

        server.Get(R"(/sessions/([^/]+)/curve\.csv)", [this](const httplib::Request& req, httplib::Response& res) {
            with_errors(res, [&] {
                res.status = 200;
                res.set_content(service.curve_csv(req.matches[1]), "text/csv");
            });
        });
    }
};

LabelingServer::LabelingServer(LabelingService& service) : impl_(std::make_unique<Impl>(service)) {}

LabelingServer::~LabelingServer() { stop(); }

int LabelingServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw Error("cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void LabelingServer::serve() { impl_->server.listen_after_bind(); }

void LabelingServer::stop() {
    if (impl_) impl_->server.stop();
}

std::string LabelingServer::default_bind_address() {
    const char* env = std::getenv("GAAL_BIND");
    return env && *env ? env : "127.0.0.1";
}

}  // namespace gaal
