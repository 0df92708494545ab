#include "icr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "icr/textproc.hpp"

namespace icr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<std::pair<IntentPath, double>> considered_from(
    const std::vector<SequenceScore>& ranked) {
    std::vector<std::pair<IntentPath, double>> out;
    out.reserve(ranked.size());
    for (const auto& s : ranked) out.emplace_back(s.intent, s.normalized_prob);
    return out;
}

// Fallback shape shared by flat and hierarchical paths: the first candidate
// wins with no probability attached, the rest follow in candidate order.
Prediction fallback_prediction(const std::vector<IntentPath>& candidates) {
    Prediction p;
    p.intent = candidates.front();
    p.normalized_prob = 0.0;
    for (const auto& intent : candidates) p.candidates_considered.emplace_back(intent, 0.0);
    p.fallback_used = true;
    return p;
}

}  // namespace

std::string to_string(RetrieverKind kind) {
    switch (kind) {
        case RetrieverKind::bm25: return "bm25";
        case RetrieverKind::dense: return "dense";
        case RetrieverKind::maxsim: return "maxsim";
    }
    return "dense";
}

RetrieverKind retriever_kind_from_string(const std::string& name) {
    if (name == "bm25") return RetrieverKind::bm25;
    if (name == "dense") return RetrieverKind::dense;
    if (name == "maxsim") return RetrieverKind::maxsim;
    throw ConfigError("unknown retriever \"" + name + "\" (expected bm25, dense, or maxsim)");
}

Classifier::Classifier(PipelineConfig config, std::shared_ptr<const ExemplarIndex> index,
                       std::shared_ptr<EmbeddingProvider> embedder,
                       std::shared_ptr<LogitProvider> scorer, IntentCatalog catalog)
    : config_(std::move(config)),
      index_(std::move(index)),
      embedder_(std::move(embedder)),
      scorer_(std::move(scorer)),
      catalog_(std::move(catalog)) {
    if (config_.top_k < 1) throw ConfigError("top_k must be >= 1");
    if (!index_) throw ConfigError("classifier needs an index");
    if (!embedder_) throw ConfigError("classifier needs an embedding provider");
    if (!scorer_) throw ConfigError("classifier needs a logit provider");
}

std::shared_ptr<const ExemplarIndex> Classifier::index_snapshot() const {
    std::lock_guard lock(index_mu_);
    return index_;
}

void Classifier::swap_index(std::shared_ptr<const ExemplarIndex> index) {
    if (!index) throw ConfigError("cannot swap in a null index");
    std::lock_guard lock(index_mu_);
    index_ = std::move(index);
}

CandidateSet retrieve_candidates(const ExemplarIndex& index, EmbeddingProvider& embedder,
                                 const PipelineConfig& config, const std::string& query,
                                 std::size_t k, const std::optional<std::string>& vertical) {
    if (k < 1) throw ValidationError("top_k must be >= 1");
    RetrievalOptions opts;
    opts.vertical = vertical ? vertical : config.vertical;
    opts.min_score = config.min_similarity;
    switch (config.retriever) {
        case RetrieverKind::bm25:
            return bm25_topk(index, tokenize(query).tokens, k, config.bm25, opts);
        case RetrieverKind::dense:
            opts.expect_fingerprint = embedder.fingerprint();
            return dense_topk(index, embedder.embed(query), k, opts);
        case RetrieverKind::maxsim:
            opts.expect_fingerprint = embedder.fingerprint();
            return maxsim_topk(index, embed_tokens(query, embedder), k, opts);
    }
    throw ConfigError("unknown retriever kind");
}

CandidateSet Classifier::retrieve(const ExemplarIndex& index, const std::string& query,
                                  const ClassifyOverrides& over) const {
    return retrieve_candidates(index, *embedder_, config_, query,
                               over.top_k.value_or(config_.top_k), over.vertical);
}

std::vector<SequenceScore> Classifier::score_with_retries(const std::string& prompt,
                                                          const CandidateSet& candidates) const {
    const int attempts = 1 + std::max(0, config_.scorer_retries);
    for (int attempt = 1;; ++attempt) {
        try {
            return score_all(*scorer_, prompt, candidates);
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt >= attempts) throw;
            log_warn(std::string("scoring attempt ") + std::to_string(attempt) +
                     " failed, retrying: " + e.what());
        }
    }
}

Prediction Classifier::classify(const std::string& query, const ClassifyOverrides& over) const {
    const auto index = index_snapshot();

    const auto t_retrieve = Clock::now();
    CandidateSet candidates = retrieve(*index, query, over);
    if (candidates.empty()) {
        throw NoCandidatesError("no candidates retrieved for \"" + query + "\"");
    }
    const double retrieval_ms = ms_since(t_retrieve);

    const std::string prompt = render_prompt(config_.prompt, query, candidates);
    const auto t_score = Clock::now();
    Prediction p;
    try {
        std::vector<SequenceScore> ranked = rank_scores(score_with_retries(prompt, candidates));
        p.intent = ranked.front().intent;
        p.normalized_prob = ranked.front().normalized_prob;
        p.candidates_considered = considered_from(ranked);
    } catch (const ProviderError& e) {
        log_warn("scoring failed, falling back to top retrieved intent: " + std::string(e.what()));
        p = fallback_prediction(candidates.unique_intents);
    }
    p.scoring_ms = ms_since(t_score);
    p.retrieval_ms = retrieval_ms;
    return p;
}

std::vector<Prediction> Classifier::classify_hierarchical(const std::string& query,
                                                          const ClassifyOverrides& over) const {
    const auto index = index_snapshot();

    const auto t_retrieve = Clock::now();
    CandidateSet candidates = retrieve(*index, query, over);
    if (candidates.empty()) {
        throw NoCandidatesError("no candidates retrieved for \"" + query + "\"");
    }
    const double retrieval_ms = ms_since(t_retrieve);

    std::string vertical_id;
    if (over.vertical) {
        vertical_id = *over.vertical;
    } else if (config_.vertical) {
        vertical_id = *config_.vertical;
    } else {
        vertical_id = candidates.entries.front().pair.intent.vertical_id;
    }
    const Vertical* vertical = catalog_.find_vertical(vertical_id);
    if (!vertical) {
        throw ValidationError("vertical \"" + vertical_id + "\" is not in the catalog");
    }

    std::vector<IntentPath> base;
    for (const auto& intent : candidates.unique_intents) {
        if (intent.vertical_id == vertical_id) base.push_back(intent);
    }
    if (base.empty()) {
        throw NoCandidatesError("no candidates in vertical \"" + vertical_id + "\" for \"" +
                                query + "\"");
    }

    std::vector<Prediction> out;
    IntentPath prefix{vertical_id, {}};
    for (std::size_t level = 1; level <= vertical->level_names.size(); ++level) {
        // depth-l prefixes of candidates that extend the previous winner
        std::vector<IntentPath> pool;
        for (const auto& intent : base) {
            if (intent.labels.size() < level) continue;
            if (level > 1 && path_prefix(intent, level - 1) != prefix) continue;
            IntentPath p = path_prefix(intent, level);
            if (std::find(pool.begin(), pool.end(), p) == pool.end()) pool.push_back(std::move(p));
        }
        if (pool.empty()) {
            // no candidate goes deeper than the chosen prefix
            if (!out.empty()) out.back().fallback_used = true;
            break;
        }

        CandidateSet level_set;
        level_set.entries = candidates.entries;
        level_set.unique_intents = pool;
        level_set.k_requested = candidates.k_requested;

        const std::string prompt = render_prompt(config_.prompt, query, level_set);
        const auto t_score = Clock::now();
        Prediction p;
        try {
            std::vector<SequenceScore> ranked = rank_scores(score_with_retries(prompt, level_set));
            p.intent = ranked.front().intent;
            p.normalized_prob = ranked.front().normalized_prob;
            p.candidates_considered = considered_from(ranked);
        } catch (const ProviderError& e) {
            log_warn("level " + std::to_string(level) +
                     " scoring failed, falling back: " + std::string(e.what()));
            p = fallback_prediction(pool);
        }
        p.scoring_ms = ms_since(t_score);
        p.retrieval_ms = level == 1 ? retrieval_ms : 0.0;  // one retrieval serves all levels
        prefix = p.intent;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Classifier::BatchItem> Classifier::classify_batch(
    const std::vector<std::string>& queries, const ClassifyOverrides& over) const {
    std::vector<BatchItem> out(queries.size());
    auto work = [&](std::size_t i) {
        try {
            out[i].prediction = classify(queries[i], over);
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    };

    const std::size_t workers = std::min(config_.batch_parallelism, queries.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < queries.size(); ++i) work(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < queries.size(); i = next.fetch_add(1)) {
                work(i);
            }
        });
    }
    for (auto& t : threads) t.join();
    return out;
}

}  // namespace icr
