#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "icr/embedding.hpp"
#include "icr/retrieval.hpp"
#include "icr/scoring.hpp"
#include "icr/taxonomy.hpp"

namespace icr {

enum class RetrieverKind { bm25, dense, maxsim };

std::string to_string(RetrieverKind kind);
RetrieverKind retriever_kind_from_string(const std::string& name);

struct PipelineConfig {
    std::size_t top_k = 10;
    RetrieverKind retriever = RetrieverKind::dense;
    std::optional<std::string> vertical;  // restrict retrieval to one vertical
    bool hierarchical = false;
    // Off by default: retrieval keeps all top-k hits regardless of score.
    double min_similarity = -std::numeric_limits<double>::infinity();
    Bm25Params bm25;
    PromptTemplate prompt = PromptTemplate::standard();
    int scorer_retries = 1;          // extra attempts on retryable provider errors
    std::size_t batch_parallelism = 1;
};

struct Prediction {
    IntentPath intent;
    double normalized_prob = 0.0;
    // (intent, normalized_prob) in rank order; always contains `intent`.
    std::vector<std::pair<IntentPath, double>> candidates_considered;
    double retrieval_ms = 0.0;
    double scoring_ms = 0.0;
    // True when scoring failed and the top-1 retrieved intent was returned,
    // or when hierarchical classification stopped short of full depth.
    bool fallback_used = false;
};

struct ClassifyOverrides {
    std::optional<std::string> vertical;
    std::optional<std::size_t> top_k;
};

// The retrieval leg on its own: dispatches on config.retriever and applies
// the config's vertical filter and similarity floor. Used by the classifier
// and by retrieval-only baselines.
CandidateSet retrieve_candidates(const ExemplarIndex& index, EmbeddingProvider& embedder,
                                 const PipelineConfig& config, const std::string& query,
                                 std::size_t k, const std::optional<std::string>& vertical = {});

// Retrieve top-k exemplars, render them into a prompt, score each unique
// candidate intent by its length-normalized sequence probability, and return
// the argmax. The prediction is always one of the retrieved intents, so
// downstream routing never sees an unknown label.
class Classifier {
public:
    Classifier(PipelineConfig config, std::shared_ptr<const ExemplarIndex> index,
               std::shared_ptr<EmbeddingProvider> embedder, std::shared_ptr<LogitProvider> scorer,
               IntentCatalog catalog);

    const PipelineConfig& config() const { return config_; }
    const IntentCatalog& catalog() const { return catalog_; }

    // Readers snapshot the index pointer; deployments publish a new index by
    // swapping it here, so in-flight queries finish on the old snapshot.
    std::shared_ptr<const ExemplarIndex> index_snapshot() const;
    void swap_index(std::shared_ptr<const ExemplarIndex> index);

    Prediction classify(const std::string& query, const ClassifyOverrides& over = {}) const;

    // One prediction per taxonomy level: level l ranks the depth-l prefixes
    // of the same retrieved candidates whose depth-(l-1) prefix matches the
    // previous winner. Stops early (last element flagged) when no candidate
    // extends the chosen prefix. The vertical comes from the override or
    // config when set, else from the top-ranked retrieved exemplar.
    std::vector<Prediction> classify_hierarchical(const std::string& query,
                                                  const ClassifyOverrides& over = {}) const;

    struct BatchItem {
        std::optional<Prediction> prediction;
        std::string error;  // empty on success
    };

    // Elementwise equal to sequential classify; per-item failures land in
    // BatchItem.error without aborting the batch. Fans out across
    // config.batch_parallelism threads when > 1.
    std::vector<BatchItem> classify_batch(const std::vector<std::string>& queries,
                                          const ClassifyOverrides& over = {}) const;

private:
    CandidateSet retrieve(const ExemplarIndex& index, const std::string& query,
                          const ClassifyOverrides& over) const;
    std::vector<SequenceScore> score_with_retries(const std::string& prompt,
                                                  const CandidateSet& candidates) const;

    PipelineConfig config_;
    std::shared_ptr<const ExemplarIndex> index_;
    mutable std::mutex index_mu_;
    std::shared_ptr<EmbeddingProvider> embedder_;
    std::shared_ptr<LogitProvider> scorer_;
    IntentCatalog catalog_;
};

}  // namespace icr
