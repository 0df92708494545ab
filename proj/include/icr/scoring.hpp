#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "icr/common.hpp"
#include "icr/retrieval.hpp"
#include "icr/taxonomy.hpp"

namespace icr {

// Prompt layout: instruction, one line per retrieved exemplar in rank order,
// one line per unique candidate intent in first-appearance order, then the
// query line last. Formats use {query} and {intent} placeholders.
struct PromptTemplate {
    std::string instruction;
    std::string exemplar_format;
    std::string candidate_format;
    std::string query_format;  // should end with {query}; the scorer reads
                               // the query's last token as bigram context

    static PromptTemplate standard();
};

// Deterministic; throws NoCandidatesError when candidates is empty.
std::string render_prompt(const PromptTemplate& tpl, const std::string& query,
                          const CandidateSet& candidates);

// Sparse conditional-probability table: context token -> {next token ->
// weight}. The "" context is the unigram row used when a context has no row
// of its own. Weights are unnormalized; lookups divide by the row sum, so
// counts and probabilities are interchangeable.
class BigramTable {
public:
    using Row = std::map<std::string, double>;

    static BigramTable from_sequences(const std::vector<std::vector<std::string>>& sequences);
    static BigramTable from_json(const std::string& text);
    std::string to_json() const;

    void set(const std::string& context, const std::string& next, double weight);
    // nullptr when the context has no row (callers fall back to row("")).
    const Row* row(const std::string& context) const;
    double row_sum(const Row& row) const;
    // Sorted union of every next token across all rows.
    std::vector<std::string> vocabulary() const;
    bool empty() const { return rows_.empty(); }

private:
    std::map<std::string, Row> rows_;
};

// Log-probability vector over table.vocabulary() for the row selected by the
// last context token (its own row if present, else the unigram row). Tokens
// absent from the selected row get -infinity. Throws ProviderError when
// neither row exists.
std::vector<double> mock_logits(const BigramTable& table,
                                const std::vector<std::string>& context_tokens);

struct LogitProviderSpec {
    enum class Kind { mock, remote };
    Kind kind = Kind::mock;
    std::string table_path;  // mock kind
    std::string endpoint;    // remote kind, e.g. http://host:port/logprobs
    std::string model;       // remote kind
    int timeout_ms = 5000;
    int max_retries = 2;
    std::string api_key_env = "ICR_API_KEY";
};

class LogitProvider {
public:
    virtual ~LogitProvider() = default;
    // One log-probability per continuation token, prompt positions excluded.
    // Throws ValidationError when the continuation has no tokens and
    // ProviderError on provider failure. Must be safe for concurrent callers.
    virtual std::vector<double> token_logprobs(const std::string& prompt,
                                               const std::string& continuation) = 0;
    // Default implementation loops; overrides must return results identical
    // to sequential calls.
    virtual std::vector<std::vector<double>> token_logprobs_batch(
        const std::string& prompt, const std::vector<std::string>& continuations);
};

// Word-level bigram model over the table. Prompt and continuation are run
// through tokenize(), so punctuation (including the " > " joiners in
// rendered intents) never reaches the table and the context for the first
// continuation token is the query's last word. Each token's log-probability
// is log(weight) - log(row sum) from the row mock_logits would select, with
// no smoothing: a transition the table does not cover is a ProviderError.
class MockLogitProvider final : public LogitProvider {
public:
    explicit MockLogitProvider(BigramTable table);
    std::vector<double> token_logprobs(const std::string& prompt,
                                       const std::string& continuation) override;
    const BigramTable& table() const { return table_; }

private:
    BigramTable table_;
};

// Speaks {model, prompt, continuation} -> {token_logprobs: [floats]} over
// HTTP, for providers that can echo per-token log-probabilities of a forced
// continuation. Transport and 5xx failures retry then surface as retryable
// ProviderErrors.
class RemoteLogitProvider final : public LogitProvider {
public:
    explicit RemoteLogitProvider(LogitProviderSpec spec);
    std::vector<double> token_logprobs(const std::string& prompt,
                                       const std::string& continuation) override;

private:
    LogitProviderSpec spec_;
};

std::unique_ptr<LogitProvider> make_logit_provider(const LogitProviderSpec& spec);

// Length-normalized sequence probability of one candidate intent:
// exp(sum_logprob / token_count), the geometric mean of its per-token
// probabilities, so long intents are not penalized for depth.
struct SequenceScore {
    IntentPath intent;
    std::size_t token_count = 0;
    double sum_logprob = 0.0;
    double normalized_prob = 0.0;
    std::size_t candidate_rank = 0;  // index into CandidateSet.unique_intents
};

SequenceScore score_candidate(LogitProvider& provider, const std::string& prompt,
                              const IntentPath& intent, std::size_t candidate_rank = 0);

// One score per unique intent, in unique_intents order. Provider errors are
// rethrown with the failing intent named, retryability preserved.
std::vector<SequenceScore> score_all(LogitProvider& provider, const std::string& prompt,
                                     const CandidateSet& candidates);

// Non-increasing by normalized_prob; ties keep first-appearance candidate
// order, so any permutation of the input ranks identically. Throws
// ValidationError on empty input.
std::vector<SequenceScore> rank_scores(std::vector<SequenceScore> scores);

// Reporting view only: softmax over the candidates' mean log-probabilities,
// aligned with the input order. Ranking uses the raw normalized_prob values.
std::vector<double> candidate_softmax(const std::vector<SequenceScore>& scores);

}  // namespace icr
