#include "icr/embedding.hpp"

#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "icr/net.hpp"
#include "icr/textproc.hpp"

namespace icr {

using nlohmann::json;

std::string EmbeddingProviderSpec::fingerprint() const {
    if (kind == Kind::hash) {
        return "hash/dim=" + std::to_string(dim) + "/seed=" + std::to_string(seed);
    }
    return "remote/model=" + model + "/dim=" + std::to_string(dim);
}

Vecf hash_embed(const std::vector<std::string>& tokens, int dim, std::uint64_t seed) {
    if (dim <= 0) throw ValidationError("hash_embed: dim must be positive");
    std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
    for (const auto& tok : tokens) {
        const std::uint64_t h = seeded_token_hash(tok, seed);
        const auto bucket = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim));
        acc[bucket] += (h >> 63) ? -1.0 : 1.0;
    }
    double sq = 0.0;
    for (double v : acc) sq += v * v;
    Vecf out = Vecf::Zero(dim);
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (int i = 0; i < dim; ++i) out(i) = static_cast<float>(acc[static_cast<std::size_t>(i)] * inv);
    }
    return out;
}

Vecf unit_normalized(const Vecf& v) {
    const double n = norm_accurate(v);
    if (n == 0.0) throw ValidationError("unit_normalized: zero-norm vector");
    Vecf out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out(i) = static_cast<float>(static_cast<double>(v(i)) / n);
    }
    return out;
}

Vecf guard_nonzero(Vecf v, const std::string& text) {
    if (v.size() == 0) throw ValidationError("guard_nonzero: empty vector");
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) != 0.0f) return v;
    }
    log_warn("embedding for \"" + text + "\" is all-zero; substituting unit basis vector");
    v(0) = 1.0f;
    return v;
}

Matf EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
    Matf out(static_cast<Eigen::Index>(texts.size()), dim());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = embed(texts[i]).transpose();
    }
    return out;
}

HashEmbedder::HashEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim <= 0) throw ConfigError("hash embedder dim must be positive");
    spec_.kind = EmbeddingProviderSpec::Kind::hash;
    spec_.dim = dim;
    spec_.seed = seed;
}

Vecf HashEmbedder::embed(const std::string& text) {
    return guard_nonzero(hash_embed(tokenize(text).tokens, dim_, seed_), text);
}

// Counting gate: blocks callers once max_inflight requests are outstanding.
class RemoteEmbedder::Gate {
public:
    explicit Gate(int limit) : limit_(limit) {}
    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return inflight_ < limit_; });
        ++inflight_;
    }
    void release() {
        std::lock_guard lock(mu_);
        --inflight_;
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int limit_;
    int inflight_ = 0;
};

RemoteEmbedder::RemoteEmbedder(EmbeddingProviderSpec spec) : spec_(std::move(spec)) {
    if (spec_.dim <= 0) throw ConfigError("remote embedder dim must be positive");
    if (spec_.endpoint.find("://") == std::string::npos) {
        throw ConfigError("remote embedder endpoint must be a URL: " + spec_.endpoint);
    }
    gate_ = std::make_shared<Gate>(spec_.max_inflight < 1 ? 1 : spec_.max_inflight);
}

Vecf RemoteEmbedder::embed(const std::string& text) {
    Matf rows = embed_batch({text});
    return rows.row(0).transpose();
}

Matf RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) {
    json req{{"model", spec_.model}, {"input", texts}};
    std::map<std::string, std::string> headers;
    if (const char* key = std::getenv(spec_.api_key_env.c_str()); key && *key) {
        headers["Authorization"] = std::string("Bearer ") + key;
    }

    gate_->acquire();
    HttpResponse resp;
    std::string last_error;
    for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
        resp = http_post_json(spec_.endpoint, req.dump(), spec_.timeout_ms, headers);
        if (resp.status == 0) {
            last_error = "transport failure: " + resp.transport_error;
            continue;
        }
        if (resp.status >= 500) {
            last_error = "server error " + std::to_string(resp.status);
            continue;
        }
        break;
    }
    gate_->release();

    if (resp.status == 0 || resp.status >= 500) {
        throw ProviderError("embedding endpoint unavailable: " + last_error, true);
    }
    if (resp.status != 200) {
        throw ProviderError("embedding endpoint returned " + std::to_string(resp.status) + ": " +
                                resp.body,
                            false);
    }

    json body;
    try {
        body = json::parse(resp.body);
    } catch (const json::parse_error& e) {
        throw ProviderError(std::string("embedding response is not JSON: ") + e.what(), false);
    }
    if (!body.contains("embeddings") || !body["embeddings"].is_array() ||
        body["embeddings"].size() != texts.size()) {
        throw ProviderError("embedding response missing/mis-sized \"embeddings\" array", false);
    }
    Matf out(static_cast<Eigen::Index>(texts.size()), spec_.dim);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto& row = body["embeddings"][i];
        if (!row.is_array() || static_cast<int>(row.size()) != spec_.dim) {
            throw ConfigError("embedding dimension mismatch: expected " +
                              std::to_string(spec_.dim) + ", got " + std::to_string(row.size()));
        }
        Vecf v(spec_.dim);
        for (int d = 0; d < spec_.dim; ++d) v(d) = row[static_cast<std::size_t>(d)].get<float>();
        out.row(static_cast<Eigen::Index>(i)) = guard_nonzero(std::move(v), texts[i]).transpose();
    }
    return out;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingProviderSpec& spec) {
    if (spec.kind == EmbeddingProviderSpec::Kind::hash) {
        return std::make_unique<HashEmbedder>(spec.dim, spec.seed);
    }
    return std::make_unique<RemoteEmbedder>(spec);
}

}  // namespace icr
