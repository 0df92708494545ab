#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "icr/pipeline.hpp"
#include "icr/retrieval.hpp"
#include "icr/scoring.hpp"
#include "icr/taxonomy.hpp"

namespace icr {

struct LabeledExample {
    std::string query;
    IntentPath gold;
    std::string split;  // "index" or "test"
};

// One JSON object per line: {query, vertical, intent, split}.
std::string examples_to_jsonl(const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> examples_from_jsonl(const std::string& jsonl_text);

// Index-split examples as exemplar pairs, ids assigned by position.
std::vector<ExemplarPair> to_exemplar_pairs(const std::vector<LabeledExample>& examples);

struct ClassMetrics {
    IntentPath intent;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;  // gold occurrences
};

struct Aggregate {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct VerticalMetrics {
    Aggregate micro;
    Aggregate macro;
    double accuracy = 0.0;
    std::size_t support = 0;
};

struct LatencyStats {
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    double mean_ms = 0.0;
};

// Nearest-rank percentiles; empty samples leave the stats at zero.
LatencyStats latency_stats(std::vector<double> samples_ms);

struct EvalReport {
    // One row per intent seen in golds or predictions, sorted.
    std::vector<ClassMetrics> per_class;
    // Micro averages pool TP/FP/FN over classes; for single-label data
    // micro precision == micro recall == accuracy. Macro averages are
    // unweighted means over per_class (macro.f1 averages the class F1s,
    // it is not the harmonic mean of macro precision and recall).
    Aggregate micro;
    Aggregate macro;
    double accuracy = 0.0;
    std::size_t total = 0;
    std::map<std::string, VerticalMetrics> per_vertical;  // keyed by vertical id
    // Per vertical: element l-1 is the accuracy of depth-l path prefixes,
    // so element 0 tracks routing to the right top-level branch.
    std::map<std::string, std::vector<double>> prefix_accuracy;
    LatencyStats retrieval_latency;
    LatencyStats scoring_latency;
    double fallback_rate = 0.0;
    double error_rate = 0.0;
    std::string config_summary;

    std::string to_json() const;
    std::string to_csv() const;  // per-class grid plus an __overall__ row
};

// Exact full-path match metrics. Precision and recall fall back to 0 when
// their denominator is 0, and F1 is 0 when precision + recall is 0.
// Throws ValidationError when the vectors differ in length. Latency and
// config fields of the result are left for the caller.
EvalReport compute_metrics(const std::vector<IntentPath>& predictions,
                           const std::vector<IntentPath>& golds);

// Synthetic benchmark generator. Every intent owns a unique leaf keyword
// token; index exemplars read "<filler> <keyword>" and test queries
// "<filler> <filler> <keyword>", with fillers shared across intents and
// mined so no two corpus tokens share a feature-hash bucket under
// (hash_dim, hash_seed). Noise rewrites each test token with probability
// `noise` to a random other intent's keyword, which misleads retrieval but
// leaves scoring anchored on the final token whenever it survives.
struct SyntheticSpec {
    struct Shape {
        std::string vertical_id;
        std::vector<int> branching;  // children per level, each in [1, 9]
    };
    // Roughly 70 and 800 leaf intents.
    std::vector<Shape> shapes = {{"retail", {5, 5, 3}}, {"digital", {5, 5, 5, 7}}};
    int templates_per_intent = 3;  // index exemplars per intent
    int test_per_intent = 2;
    double noise = 0.0;  // in [0, 1)
    // Replace each test query's keyword with a distinct synonym string mined
    // to hash into the same signed bucket: invisible to term matching,
    // identical to the dense embedder.
    bool paraphrase = false;
    int hash_dim = 2048;
    std::uint64_t hash_seed = 42;
    std::uint64_t seed = 42;
};

struct SyntheticCorpus {
    IntentCatalog catalog;
    std::vector<LabeledExample> index_split;
    std::vector<LabeledExample> test_split;
    std::vector<std::string> keyword_vocab;        // one lowercase token per intent
    std::map<std::string, std::string> synonyms;   // keyword -> twin (paraphrase only)
    // Transition weights that route a query's final keyword to its own
    // top-level branch and spread uniformly below it, with every other
    // branch kept reachable at low weight so any candidate stays scorable.
    BigramTable scoring_table;
};

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec);

// Runs classify over the test split (batched per the classifier's config)
// and fills a full report. Per-query errors count as misclassifications
// under a sentinel empty intent rather than aborting the run.
EvalReport run_eval(const Classifier& classifier, const std::vector<LabeledExample>& test);

// Predicts the top-1 retrieved exemplar's intent with no scoring pass.
EvalReport run_baseline_nearest(const ExemplarIndex& index, EmbeddingProvider& embedder,
                                const PipelineConfig& config,
                                const std::vector<LabeledExample>& test);

struct SweepRow {
    std::size_t k = 0;
    double accuracy = 0.0;
    double gold_coverage = 0.0;  // gold intent present among scored candidates
    double mean_candidates = 0.0;
    LatencyStats retrieval_latency;
    LatencyStats scoring_latency;
};

// One row per k, same classifier otherwise. ks must be non-empty and
// strictly ascending (ValidationError).
std::vector<SweepRow> run_topk_sweep(const Classifier& classifier,
                                     const std::vector<std::size_t>& ks,
                                     const std::vector<LabeledExample>& test);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string sweep_to_json(const std::vector<SweepRow>& rows);

struct OodReport {
    EvalReport in_domain;
    EvalReport out_of_domain;
    // Fraction of test golds present in the index at all; predictions are
    // constrained to retrieved intents, so zero coverage pins accuracy at 0.
    double in_domain_coverage = 0.0;
    double out_of_domain_coverage = 0.0;
};

OodReport run_ood_eval(const Classifier& classifier, const std::vector<LabeledExample>& in_test,
                       const std::vector<LabeledExample>& ood_test);

// Adds a fixed sleep to every scoring call so benchmark latency reflects
// call counts instead of mock table lookups.
class DelayLogitProvider final : public LogitProvider {
public:
    DelayLogitProvider(std::shared_ptr<LogitProvider> inner, int delay_us);
    std::vector<double> token_logprobs(const std::string& prompt,
                                       const std::string& continuation) override;

private:
    std::shared_ptr<LogitProvider> inner_;
    int delay_us_;
};

}  // namespace icr
