#include "icr/service.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <utility>

#include "icr/common.hpp"
#include "icr/index_io.hpp"
#include "icr/taxonomy.hpp"

// httplib drags in <resolv.h>, whose _res macro mangles Eigen internals, so
// every Eigen-bearing header above must come first.
#include <httplib.h>
#include <json.hpp>

namespace icr {

namespace {

using nlohmann::json;

void respond(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void respond_error(httplib::Response& res, int status, const std::string& message) {
    respond(res, status, json{{"error", message}});
}

// Parses the body and enforces the allowed field set; replies 400 and
// returns nothing on any shape problem.
std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res,
                               const std::set<std::string>& allowed) {
    json body;
    try {
        body = json::parse(req.body.empty() ? "{}" : req.body);
    } catch (const json::parse_error& e) {
        respond_error(res, 400, std::string("body is not valid JSON: ") + e.what());
        return std::nullopt;
    }
    if (!body.is_object()) {
        respond_error(res, 400, "body must be a JSON object");
        return std::nullopt;
    }
    for (const auto& item : body.items()) {
        if (!allowed.count(item.key())) {
            respond_error(res, 400, "unknown field \"" + item.key() + "\"");
            return std::nullopt;
        }
    }
    return body;
}

}  // namespace

std::string prediction_to_json(const Prediction& prediction, bool pretty) {
    json doc;
    doc["intent"] = json{{"vertical", prediction.intent.vertical_id},
                         {"path", render_intent_path(prediction.intent)}};
    doc["normalized_prob"] = prediction.normalized_prob;
    doc["candidates"] = json::array();
    for (const auto& [intent, prob] : prediction.candidates_considered) {
        doc["candidates"].push_back(json{{"vertical", intent.vertical_id},
                                         {"path", render_intent_path(intent)},
                                         {"normalized_prob", prob}});
    }
    doc["fallback_used"] = prediction.fallback_used;
    doc["retrieval_ms"] = prediction.retrieval_ms;
    doc["scoring_ms"] = prediction.scoring_ms;
    return pretty ? doc.dump(2) : doc.dump();
}

struct ClassificationService::Impl {
    httplib::Server server;
};

ClassificationService::ClassificationService(ServiceConfig config,
                                             std::shared_ptr<Classifier> classifier,
                                             std::shared_ptr<EmbeddingProvider> embedder)
    : config_(std::move(config)),
      classifier_(std::move(classifier)),
      embedder_(std::move(embedder)) {
    if (!classifier_) throw ConfigError("service needs a classifier");
    if (!embedder_) throw ConfigError("service needs an embedding provider");
    if (config_.request_timeout_ms <= 0) throw ConfigError("request timeout must be > 0");
    if (config_.max_concurrency < 1) throw ConfigError("max concurrency must be >= 1");
    if (!config_.auth_token_env.empty()) {
        if (const char* token = std::getenv(config_.auth_token_env.c_str())) {
            auth_token_ = token;
        }
    }
    replay_wal();
}

ClassificationService::~ClassificationService() { stop(); }

void ClassificationService::replay_wal() {
    if (config_.wal_path.empty() || !std::filesystem::exists(config_.wal_path)) return;
    const auto pairs = read_corpus_jsonl(config_.wal_path, classifier_->catalog());
    if (pairs.empty()) return;
    auto next = std::make_shared<ExemplarIndex>(*classifier_->index_snapshot());
    for (const auto& pair : pairs) next->upsert(pair, *embedder_, classifier_->catalog());
    classifier_->swap_index(std::move(next));
    log_info("replayed " + std::to_string(pairs.size()) + " write-ahead exemplars from " +
             config_.wal_path);
}

void ClassificationService::append_wal(const ExemplarPair& pair) {
    if (config_.wal_path.empty()) return;
    std::ofstream out(config_.wal_path, std::ios::binary | std::ios::app);
    json line{{"id", pair.id},
              {"query", pair.query},
              {"vertical", pair.intent.vertical_id},
              {"intent", render_intent_path(pair.intent)}};
    out << line.dump() << "\n";
    out.flush();
    if (!out) throw Error("cannot append to write-ahead log " + config_.wal_path);
}

int ClassificationService::start() {
    if (impl_) throw ConfigError("service already started");
    impl_ = std::make_unique<Impl>();
    auto& server = impl_->server;

    server.new_task_queue = [n = config_.max_concurrency] {
        return new httplib::ThreadPool(static_cast<std::size_t>(n));
    };
    const time_t timeout_s = config_.request_timeout_ms / 1000;
    const time_t timeout_us = (config_.request_timeout_ms % 1000) * 1000;
    server.set_read_timeout(timeout_s, timeout_us);
    server.set_write_timeout(timeout_s, timeout_us);

    const auto authorized = [this](const httplib::Request& req, httplib::Response& res) {
        if (auth_token_.empty()) return true;
        if (req.get_header_value("Authorization") == "Bearer " + auth_token_) return true;
        respond_error(res, 401, "unauthorized");
        return false;
    };

    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
        const auto snapshot = classifier_->index_snapshot();
        respond(res, 200,
                json{{"status", "ok"},
                     {"index_fingerprint", snapshot->fingerprint()},
                     {"index_size", snapshot->size()}});
    });

    server.Post("/classify", [this, authorized](const httplib::Request& req,
                                                httplib::Response& res) {
        if (!authorized(req, res)) return;
        const auto body = parse_body(req, res, {"query", "vertical", "top_k"});
        if (!body) return;
        if (!body->contains("query")) {
            respond_error(res, 400, "missing \"query\"");
            return;
        }
        try {
            ClassifyOverrides over;
            std::string query;
            try {
                query = body->at("query").get<std::string>();
                if (body->contains("vertical")) {
                    over.vertical = body->at("vertical").get<std::string>();
                }
                if (body->contains("top_k")) over.top_k = body->at("top_k").get<std::size_t>();
            } catch (const json::exception& e) {
                respond_error(res, 400, e.what());
                return;
            }
            if (query.empty()) throw ValidationError("query must be non-empty");
            const auto prediction = classifier_->classify(query, over);
            res.status = 200;
            res.set_content(prediction_to_json(prediction), "application/json");
        } catch (const ProviderError& e) {
            respond_error(res, 503, e.what());
        } catch (const NoCandidatesError& e) {
            respond_error(res, 422, e.what());
        } catch (const ValidationError& e) {
            respond_error(res, 422, e.what());
        } catch (const std::exception& e) {
            respond_error(res, 500, e.what());
        }
    });

    server.Post("/index/upsert", [this, authorized](const httplib::Request& req,
                                                    httplib::Response& res) {
        if (!authorized(req, res)) return;
        const auto body = parse_body(req, res, {"id", "query", "vertical", "intent"});
        if (!body) return;
        for (const char* field : {"id", "query", "vertical", "intent"}) {
            if (!body->contains(field)) {
                respond_error(res, 400, std::string("missing \"") + field + "\"");
                return;
            }
        }
        try {
            ExemplarPair pair;
            std::string vertical;
            std::string intent;
            try {
                pair.id = body->at("id").get<std::int64_t>();
                pair.query = body->at("query").get<std::string>();
                vertical = body->at("vertical").get<std::string>();
                intent = body->at("intent").get<std::string>();
            } catch (const json::exception& e) {
                respond_error(res, 400, e.what());
                return;
            }
            pair.intent = parse_intent_path(intent, vertical, classifier_->catalog());
            validate_pair(pair, classifier_->catalog());

            // Serialize writers: clone, index the new pair, make it durable,
            // then publish. Readers keep the old snapshot until the swap.
            std::lock_guard lock(upsert_mu_);
            auto next = std::make_shared<ExemplarIndex>(*classifier_->index_snapshot());
            next->upsert(pair, *embedder_, classifier_->catalog());
            append_wal(pair);
            const auto size = next->size();
            classifier_->swap_index(std::move(next));
            respond(res, 200, json{{"ok", true}, {"index_size", size}});
        } catch (const ProviderError& e) {
            respond_error(res, 503, e.what());
        } catch (const ValidationError& e) {
            respond_error(res, 422, e.what());
        } catch (const std::exception& e) {
            respond_error(res, 500, e.what());
        }
    });

    server.Post("/index/snapshot", [this, authorized](const httplib::Request& req,
                                                      httplib::Response& res) {
        if (!authorized(req, res)) return;
        const auto body = parse_body(req, res, {});
        if (!body) return;
        if (config_.index_path.empty()) {
            respond_error(res, 422, "no index path configured for snapshots");
            return;
        }
        try {
            // Hold the writer lock so the saved file and the truncated log
            // describe the same index state.
            std::lock_guard lock(upsert_mu_);
            const auto snapshot = classifier_->index_snapshot();
            save_index(*snapshot, config_.index_path);
            if (!config_.wal_path.empty()) {
                std::ofstream(config_.wal_path, std::ios::binary | std::ios::trunc);
            }
            respond(res, 200,
                    json{{"ok", true},
                         {"path", config_.index_path},
                         {"index_size", snapshot->size()}});
        } catch (const std::exception& e) {
            respond_error(res, 500, e.what());
        }
    });

    if (config_.port == 0) {
        port_ = server.bind_to_any_port(config_.host);
    } else {
        port_ = server.bind_to_port(config_.host, config_.port) ? config_.port : -1;
    }
    if (port_ <= 0) {
        impl_.reset();
        throw ConfigError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    serve_thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void ClassificationService::stop() {
    if (impl_) impl_->server.stop();
    if (serve_thread_.joinable()) serve_thread_.join();
}

}  // namespace icr
