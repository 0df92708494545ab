#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "icr/common.hpp"

namespace icr {

using Vecf = Eigen::VectorXf;
using Matf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dot product accumulated in double in coefficient order. Retrieval scores
// must be reproducible bit-for-bit against reference scans, so this avoids
// vectorized reductions whose summation order varies.
template <typename A, typename B>
double dot_accurate(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a(i)) * static_cast<double>(b(i));
    }
    return acc;
}

template <typename A>
double norm_accurate(const Eigen::MatrixBase<A>& a) {
    return std::sqrt(dot_accurate(a, a));
}

// a·b / (|a||b|), symmetric, in [-1, 1] up to rounding; cosine(a,a) is 1
// within 1e-12. Throws ValidationError on dimension mismatch or zero norm.
template <typename A, typename B>
double cosine(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    if (a.size() != b.size()) {
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    }
    const double na = norm_accurate(a);
    const double nb = norm_accurate(b);
    if (na == 0.0 || nb == 0.0) throw ValidationError("cosine: zero-norm input");
    return dot_accurate(a, b) / (na * nb);
}

struct EmbeddingProviderSpec {
    enum class Kind { hash, remote };
    Kind kind = Kind::hash;
    int dim = 256;
    std::uint64_t seed = 42;     // hash kind
    std::string endpoint;        // remote kind, e.g. http://host:port/embed
    std::string model;           // remote kind
    int timeout_ms = 5000;
    int max_retries = 2;
    int max_inflight = 4;
    std::string api_key_env = "ICR_API_KEY";

    // Stable identity string stored in index files; a query-time provider
    // whose fingerprint differs cannot search that index.
    std::string fingerprint() const;
};

// Feature hashing: each token lands in bucket hash % dim with sign taken from
// the hash's top bit; the signed counts are L2-normalized. Empty token list
// yields the zero vector (callers apply the zero guard).
Vecf hash_embed(const std::vector<std::string>& tokens, int dim, std::uint64_t seed);

// v / |v| with the norm and divisions done in double, rounded to float once.
// Index rows and query vectors both pass through here so stored and ad hoc
// normalizations are bit-identical. Throws ValidationError on zero norm.
Vecf unit_normalized(const Vecf& v);

// Replaces an all-zero vector with the first unit basis vector, logging a
// warning; embed() must never hand the index a zero row.
Vecf guard_nonzero(Vecf v, const std::string& text);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int dim() const = 0;
    virtual std::string fingerprint() const = 0;
    virtual Vecf embed(const std::string& text) = 0;
    // Default implementation loops over embed(); remote providers override
    // with one wire call. Must be safe for concurrent callers.
    virtual Matf embed_batch(const std::vector<std::string>& texts);
};

class HashEmbedder final : public EmbeddingProvider {
public:
    HashEmbedder(int dim, std::uint64_t seed);
    int dim() const override { return dim_; }
    std::string fingerprint() const override { return spec_.fingerprint(); }
    Vecf embed(const std::string& text) override;

private:
    int dim_;
    std::uint64_t seed_;
    EmbeddingProviderSpec spec_;
};

// Speaks {model, input: [texts]} -> {embeddings: [[floats]]} over HTTP.
// Transport and 5xx failures are retried then surfaced as retryable
// ProviderErrors; a response of the wrong dimension is a ConfigError.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(EmbeddingProviderSpec spec);
    int dim() const override { return spec_.dim; }
    std::string fingerprint() const override { return spec_.fingerprint(); }
    Vecf embed(const std::string& text) override;
    Matf embed_batch(const std::vector<std::string>& texts) override;

private:
    EmbeddingProviderSpec spec_;
    class Gate;
    std::shared_ptr<Gate> gate_;  // bounds in-flight requests
};

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingProviderSpec& spec);

}  // namespace icr
