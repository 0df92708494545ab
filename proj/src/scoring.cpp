#include "icr/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "icr/net.hpp"
#include "icr/textproc.hpp"

namespace icr {

using nlohmann::json;

namespace {

std::string substitute(std::string format, const std::string& placeholder,
                       const std::string& value) {
    std::size_t pos = 0;
    while ((pos = format.find(placeholder, pos)) != std::string::npos) {
        format.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
    return format;
}

}  // namespace

PromptTemplate PromptTemplate::standard() {
    PromptTemplate tpl;
    tpl.instruction = "Pick the best intent for the final query from the candidates below.";
    tpl.exemplar_format = "Example: {query} => {intent}";
    tpl.candidate_format = "Candidate: {intent}";
    tpl.query_format = "Query: {query}";
    return tpl;
}

std::string render_prompt(const PromptTemplate& tpl, const std::string& query,
                          const CandidateSet& candidates) {
    if (candidates.empty()) throw NoCandidatesError("render_prompt: no candidates to rank");
    std::string out = tpl.instruction;
    for (const auto& entry : candidates.entries) {
        std::string line = substitute(tpl.exemplar_format, "{query}", entry.pair.query);
        line = substitute(line, "{intent}", render_intent_path(entry.pair.intent));
        out += "\n" + line;
    }
    for (const auto& intent : candidates.unique_intents) {
        out += "\n" + substitute(tpl.candidate_format, "{intent}", render_intent_path(intent));
    }
    out += "\n" + substitute(tpl.query_format, "{query}", query);
    return out;
}

BigramTable BigramTable::from_sequences(const std::vector<std::vector<std::string>>& sequences) {
    BigramTable table;
    for (const auto& seq : sequences) {
        for (std::size_t i = 0; i < seq.size(); ++i) {
            table.rows_[""][seq[i]] += 1.0;
            if (i > 0) table.rows_[seq[i - 1]][seq[i]] += 1.0;
        }
    }
    return table;
}

BigramTable BigramTable::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("bigram table is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("bigram table must be a JSON object");
    BigramTable table;
    for (const auto& [context, row] : doc.items()) {
        if (!row.is_object()) {
            throw ConfigError("bigram row for \"" + context + "\" must be an object");
        }
        for (const auto& [next, weight] : row.items()) {
            if (!weight.is_number()) {
                throw ConfigError("bigram weight for \"" + context + "\" -> \"" + next +
                                  "\" must be a number");
            }
            const double w = weight.get<double>();
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw ConfigError("bigram weight for \"" + context + "\" -> \"" + next +
                                  "\" must be positive and finite");
            }
            table.rows_[context][next] = w;
        }
    }
    return table;
}

std::string BigramTable::to_json() const {
    json doc = json::object();
    for (const auto& [context, row] : rows_) {
        json r = json::object();
        for (const auto& [next, weight] : row) r[next] = weight;
        doc[context] = std::move(r);
    }
    return doc.dump(2);
}

void BigramTable::set(const std::string& context, const std::string& next, double weight) {
    if (!(weight > 0.0) || !std::isfinite(weight)) {
        throw ConfigError("bigram weight must be positive and finite");
    }
    rows_[context][next] = weight;
}

const BigramTable::Row* BigramTable::row(const std::string& context) const {
    auto it = rows_.find(context);
    return it == rows_.end() ? nullptr : &it->second;
}

double BigramTable::row_sum(const Row& row) const {
    double sum = 0.0;
    for (const auto& [next, weight] : row) sum += weight;
    return sum;
}

std::vector<std::string> BigramTable::vocabulary() const {
    std::set<std::string> vocab;
    for (const auto& [context, row] : rows_) {
        for (const auto& [next, weight] : row) vocab.insert(next);
    }
    return {vocab.begin(), vocab.end()};
}

namespace {

// Row selection shared by mock_logits and the mock provider: the context
// token's own row when present, the unigram row otherwise.
const BigramTable::Row* select_row(const BigramTable& table, const std::string& context) {
    if (const auto* row = table.row(context)) return row;
    return table.row("");
}

}  // namespace

std::vector<double> mock_logits(const BigramTable& table,
                                const std::vector<std::string>& context_tokens) {
    const std::string context = context_tokens.empty() ? "" : context_tokens.back();
    const auto* row = select_row(table, context);
    if (!row) {
        throw ProviderError("bigram table has no row for \"" + context +
                                "\" and no unigram fallback",
                            false);
    }
    const double log_sum = std::log(table.row_sum(*row));
    std::vector<double> out;
    for (const auto& tok : table.vocabulary()) {
        auto it = row->find(tok);
        if (it == row->end()) {
            out.push_back(-std::numeric_limits<double>::infinity());
        } else {
            out.push_back(std::log(it->second) - log_sum);
        }
    }
    return out;
}

std::vector<std::vector<double>> LogitProvider::token_logprobs_batch(
    const std::string& prompt, const std::vector<std::string>& continuations) {
    std::vector<std::vector<double>> out;
    out.reserve(continuations.size());
    for (const auto& c : continuations) out.push_back(token_logprobs(prompt, c));
    return out;
}

MockLogitProvider::MockLogitProvider(BigramTable table) : table_(std::move(table)) {
    if (table_.empty()) throw ConfigError("mock logit provider needs a non-empty bigram table");
}

std::vector<double> MockLogitProvider::token_logprobs(const std::string& prompt,
                                                      const std::string& continuation) {
    const std::vector<std::string> cont = tokenize(continuation).tokens;
    if (cont.empty()) {
        throw ValidationError("continuation \"" + continuation + "\" has no tokens");
    }
    const std::vector<std::string> ptoks = tokenize(prompt).tokens;
    std::string context = ptoks.empty() ? "" : ptoks.back();
    std::vector<double> out;
    out.reserve(cont.size());
    for (const auto& tok : cont) {
        const auto* row = select_row(table_, context);
        if (!row) {
            throw ProviderError("bigram table has no row for \"" + context +
                                    "\" and no unigram fallback",
                                false);
        }
        auto it = row->find(tok);
        if (it == row->end()) {
            throw ProviderError("bigram table gives \"" + tok + "\" no probability after \"" +
                                    context + "\"",
                                false);
        }
        out.push_back(std::log(it->second) - std::log(table_.row_sum(*row)));
        context = tok;
    }
    return out;
}

RemoteLogitProvider::RemoteLogitProvider(LogitProviderSpec spec) : spec_(std::move(spec)) {
    if (spec_.endpoint.find("://") == std::string::npos) {
        throw ConfigError("remote logit endpoint must be a URL: " + spec_.endpoint);
    }
}

std::vector<double> RemoteLogitProvider::token_logprobs(const std::string& prompt,
                                                        const std::string& continuation) {
    json req{{"model", spec_.model}, {"prompt", prompt}, {"continuation", continuation}};
    std::map<std::string, std::string> headers;
    if (const char* key = std::getenv(spec_.api_key_env.c_str()); key && *key) {
        headers["Authorization"] = std::string("Bearer ") + key;
    }

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

    if (resp.status == 0 || resp.status >= 500) {
        throw ProviderError("logit endpoint unavailable: " + last_error, true);
    }
    if (resp.status != 200) {
        throw ProviderError("logit endpoint returned " + std::to_string(resp.status) + ": " +
                                resp.body,
                            false);
    }

    json body;
    try {
        body = json::parse(resp.body);
    } catch (const json::parse_error& e) {
        throw ProviderError(std::string("logit response is not JSON: ") + e.what(), false);
    }
    if (!body.contains("token_logprobs") || !body["token_logprobs"].is_array() ||
        body["token_logprobs"].empty()) {
        throw ProviderError("logit response missing or empty \"token_logprobs\" array", false);
    }
    std::vector<double> out;
    for (const auto& v : body["token_logprobs"]) {
        if (!v.is_number()) throw ProviderError("token_logprobs entries must be numbers", false);
        const double lp = v.get<double>();
        if (lp > 0.0 || std::isnan(lp)) {
            throw ProviderError("token_logprobs entries must be log-probabilities <= 0", false);
        }
        out.push_back(lp);
    }
    return out;
}

std::unique_ptr<LogitProvider> make_logit_provider(const LogitProviderSpec& spec) {
    if (spec.kind == LogitProviderSpec::Kind::mock) {
        std::ifstream in(spec.table_path, std::ios::binary);
        if (!in) throw ConfigError("cannot open bigram table: " + spec.table_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return std::make_unique<MockLogitProvider>(BigramTable::from_json(buf.str()));
    }
    return std::make_unique<RemoteLogitProvider>(spec);
}

SequenceScore score_candidate(LogitProvider& provider, const std::string& prompt,
                              const IntentPath& intent, std::size_t candidate_rank) {
    const std::vector<double> lps = provider.token_logprobs(prompt, render_intent_path(intent));
    SequenceScore score;
    score.intent = intent;
    score.candidate_rank = candidate_rank;
    score.token_count = lps.size();
    for (double lp : lps) score.sum_logprob += lp;
    score.normalized_prob =
        std::exp(score.sum_logprob / static_cast<double>(score.token_count));
    return score;
}

std::vector<SequenceScore> score_all(LogitProvider& provider, const std::string& prompt,
                                     const CandidateSet& candidates) {
    if (candidates.unique_intents.empty()) {
        throw NoCandidatesError("score_all: no candidate intents");
    }
    std::vector<std::string> texts;
    texts.reserve(candidates.unique_intents.size());
    for (const auto& intent : candidates.unique_intents) {
        texts.push_back(render_intent_path(intent));
    }
    std::vector<std::vector<double>> lps;
    try {
        lps = provider.token_logprobs_batch(prompt, texts);
    } catch (const ProviderError&) {
        // Re-run one at a time so the error names the intent that failed. If
        // every retry passes the batch failure was transient; keep going.
        lps.clear();
        for (std::size_t i = 0; i < texts.size(); ++i) {
            try {
                lps.push_back(provider.token_logprobs(prompt, texts[i]));
            } catch (const ProviderError& e) {
                throw ProviderError("scoring \"" + texts[i] + "\": " + e.what(), e.retryable());
            }
        }
        log_warn("batch scoring failed but sequential scoring passed; using sequential results");
    }
    if (lps.size() != texts.size()) {
        throw ProviderError("provider returned " + std::to_string(lps.size()) +
                                " score rows for " + std::to_string(texts.size()) + " candidates",
                            false);
    }
    std::vector<SequenceScore> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (lps[i].empty()) {
            throw ProviderError("scoring \"" + texts[i] + "\": provider returned no tokens",
                                false);
        }
        SequenceScore score;
        score.intent = candidates.unique_intents[i];
        score.candidate_rank = i;
        score.token_count = lps[i].size();
        for (double lp : lps[i]) score.sum_logprob += lp;
        score.normalized_prob =
            std::exp(score.sum_logprob / static_cast<double>(score.token_count));
        out.push_back(std::move(score));
    }
    return out;
}

std::vector<SequenceScore> rank_scores(std::vector<SequenceScore> scores) {
    if (scores.empty()) throw ValidationError("rank_scores: empty score list");
    std::sort(scores.begin(), scores.end(), [](const SequenceScore& a, const SequenceScore& b) {
        if (a.normalized_prob != b.normalized_prob) return a.normalized_prob > b.normalized_prob;
        return a.candidate_rank < b.candidate_rank;
    });
    return scores;
}

std::vector<double> candidate_softmax(const std::vector<SequenceScore>& scores) {
    if (scores.empty()) return {};
    std::vector<double> means;
    means.reserve(scores.size());
    for (const auto& s : scores) {
        means.push_back(s.sum_logprob / static_cast<double>(s.token_count));
    }
    const double peak = *std::max_element(means.begin(), means.end());
    double total = 0.0;
    for (double& m : means) {
        m = std::exp(m - peak);
        total += m;
    }
    for (double& m : means) m /= total;
    return means;
}

}  // namespace icr
