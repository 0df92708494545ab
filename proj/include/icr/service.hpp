#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "icr/pipeline.hpp"

namespace icr {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 0;  // 0 binds an ephemeral port
    PipelineConfig pipeline;
    int max_concurrency = 8;
    int request_timeout_ms = 30000;
    // Name of the env var holding the bearer token; an unset or empty var
    // runs the service open. /healthz never requires auth.
    std::string auth_token_env = "ICR_SERVICE_TOKEN";
    // Optional write-ahead exemplar log in the corpus line format: upserts
    // append before they are acknowledged and are replayed at startup.
    std::string wal_path;
    // Snapshot target for POST /index/snapshot.
    std::string index_path;
};

// JSON body shared by the service and the CLI, so a /classify response and
// a locally printed prediction are the same document (timing fields aside).
std::string prediction_to_json(const Prediction& prediction, bool pretty = false);

// HTTP front end over a shared Classifier.
//   POST /classify       {query, vertical?, top_k?} -> prediction
//   POST /index/upsert   {id, query, vertical, intent} -> {ok, index_size}
//   POST /index/snapshot {} -> {ok, path, index_size}
//   GET  /healthz        -> {status, index_fingerprint, index_size}
// Classification reads index snapshots and never blocks on upserts; upserts
// serialize, appending to the write-ahead log before publishing the new
// index. Statuses: 400 malformed body, 401 bad token, 422 validation or
// empty candidates, 503 provider unavailable.
class ClassificationService {
public:
    ClassificationService(ServiceConfig config, std::shared_ptr<Classifier> classifier,
                          std::shared_ptr<EmbeddingProvider> embedder);
    ~ClassificationService();

    ClassificationService(const ClassificationService&) = delete;
    ClassificationService& operator=(const ClassificationService&) = delete;

    // Binds, serves on a background thread, and returns the bound port.
    int start();
    void stop();
    int port() const { return port_; }

    const Classifier& classifier() const { return *classifier_; }

private:
    struct Impl;  // holds the httplib server out of this header

    void replay_wal();
    void append_wal(const ExemplarPair& pair);

    ServiceConfig config_;
    std::shared_ptr<Classifier> classifier_;
    std::shared_ptr<EmbeddingProvider> embedder_;
    std::string auth_token_;
    std::unique_ptr<Impl> impl_;
    std::thread serve_thread_;
    std::mutex upsert_mu_;
    int port_ = 0;
};

}  // namespace icr
