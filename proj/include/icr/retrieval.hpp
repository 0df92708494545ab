#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icr/embedding.hpp"
#include "icr/taxonomy.hpp"

namespace icr {

struct ExemplarPair {
    std::int64_t id = 0;
    std::string query;
    IntentPath intent;

    bool operator==(const ExemplarPair&) const = default;
};

// Structural check against the catalog: known vertical, depth within the
// vertical's levels, clean labels, query non-empty after normalization.
// Membership in the catalog's intent list is deliberately not required so
// live upserts can introduce new intents.
void validate_pair(const ExemplarPair& pair, const IntentCatalog& catalog);

struct CandidateSet {
    struct Entry {
        ExemplarPair pair;
        double score = 0.0;
    };
    std::vector<Entry> entries;              // ranked, scores non-increasing
    std::vector<IntentPath> unique_intents;  // deduplicated, first-appearance order
    std::size_t k_requested = 0;

    bool empty() const { return entries.empty(); }

    // Sorts by (score desc, id asc), truncates to k, and dedups intents.
    static CandidateSet from_scored(std::vector<Entry> scored, std::size_t k_requested);
};

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;
};

struct SparseStats {
    // term -> (doc position, term frequency), sorted by doc position
    std::map<std::string, std::vector<std::pair<std::int32_t, std::int32_t>>> postings;
    std::vector<std::int32_t> doc_lens;
    double avgdl = 0.0;
};

// Exemplars plus the dense row matrix, BM25 statistics, and optional
// per-token vectors, all over the same id-sorted pair list. Queries are safe
// concurrently; upserts mutate, so concurrent deployments must swap whole
// snapshots (see Classifier::swap_index) rather than mutate a shared index.
class ExemplarIndex {
public:
    ExemplarIndex() = default;
    ExemplarIndex(std::string fingerprint, int dim, bool token_vectors = false);

    // Inserts or overwrites by pair id; dense row, sparse stats, and token
    // vectors are all updated so the pair is retrievable immediately.
    void upsert(const ExemplarPair& pair, EmbeddingProvider& provider,
                const IntentCatalog& catalog);

    // Load path: adopts prebuilt rows (must be id-sorted, unit-norm).
    static ExemplarIndex from_parts(std::string fingerprint, int dim, bool token_vectors,
                                    std::vector<ExemplarPair> pairs, Matf rows,
                                    std::vector<Matf> token_rows);

    std::size_t size() const { return pairs_.size(); }
    int dim() const { return dim_; }
    const std::string& fingerprint() const { return fingerprint_; }
    bool has_token_vectors() const { return token_vectors_; }
    const std::vector<ExemplarPair>& pairs() const { return pairs_; }
    const Matf& rows() const { return rows_; }
    const Matf& token_rows(std::size_t pos) const { return token_rows_[pos]; }
    const SparseStats& sparse() const { return sparse_; }

private:
    void rebuild_sparse();

    std::string fingerprint_;
    int dim_ = 0;
    bool token_vectors_ = false;
    std::vector<ExemplarPair> pairs_;  // sorted by id; rows_.row(i) belongs to pairs_[i]
    Matf rows_;
    std::vector<Matf> token_rows_;  // per pair, one row per query token
    SparseStats sparse_;
};

// Validates every pair (reporting all offenders at once), embeds in one
// batch, and L2-normalizes the rows.
ExemplarIndex build_index(std::vector<ExemplarPair> pairs, EmbeddingProvider& provider,
                          const IntentCatalog& catalog, bool token_vectors = false);

struct RetrievalOptions {
    std::optional<std::string> vertical;  // restrict to exemplars of one vertical
    double min_score = -std::numeric_limits<double>::infinity();
    std::string expect_fingerprint;  // non-empty: index must match or IndexError
};

// Exact top-k by cosine; with unit rows this is a dot product per row,
// accumulated in double so results are bit-identical to a reference scan.
// Ties break toward the lower pair id.
CandidateSet dense_topk(const ExemplarIndex& index, const Vecf& query_vec, std::size_t k,
                        const RetrievalOptions& opts = {});

// Okapi BM25 summed over query token occurrences:
//   score(d) = sum_t IDF(t) * tf*(k1+1) / (tf + k1*(1 - b + b*|d|/avgdl))
//   IDF(t)   = ln((N - df + 0.5)/(df + 0.5) + 1)
// Documents matching no query term are omitted; an empty or fully unindexed
// query yields an empty set.
CandidateSet bm25_topk(const ExemplarIndex& index, const std::vector<std::string>& query_tokens,
                       std::size_t k, const Bm25Params& params = {},
                       const RetrievalOptions& opts = {});

// One unit row per query token. Index token rows and ad hoc queries both use
// this, so late-interaction scores compare like with like.
Matf embed_tokens(const std::string& query, EmbeddingProvider& provider);

// Late interaction: score(d) = sum over query tokens of the max cosine
// against d's token vectors. Requires an index built with token vectors.
CandidateSet maxsim_topk(const ExemplarIndex& index, const Matf& query_token_vecs, std::size_t k,
                         const RetrievalOptions& opts = {});

// Opt-in approximate search: k-means clusters over the index rows, scanning
// only the `probes` clusters nearest the query. Exactness is traded for
// speed; recall@k against dense_topk is the contract tested on the
// synthetic benchmark (>= 0.95 with the default probe count).
class ClusteredScan {
public:
    ClusteredScan(const ExemplarIndex& index, int n_clusters, std::uint64_t seed);
    CandidateSet topk(const Vecf& query_vec, std::size_t k, int probes,
                      const RetrievalOptions& opts = {}) const;
    int n_clusters() const { return static_cast<int>(members_.size()); }

private:
    const ExemplarIndex* index_;
    Matf centroids_;
    std::vector<std::vector<std::int32_t>> members_;
};

}  // namespace icr
