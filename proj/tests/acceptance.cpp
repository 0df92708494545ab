// Acceptance gate: ten end-to-end criteria, one PASS/FAIL line each, with
// tolerances and time budgets pinned in code. Exits nonzero on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "icr/common.hpp"
#include "icr/embedding.hpp"
#include "icr/eval.hpp"
#include "icr/pipeline.hpp"
#include "icr/retrieval.hpp"
#include "icr/scoring.hpp"
#include "icr/service.hpp"
#include "icr/taxonomy.hpp"

#include <httplib.h>
#include <json.hpp>

using namespace icr;
using nlohmann::json;

namespace {

struct AcceptanceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw AcceptanceFailure(message);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Detail lines queue up during a criterion and print under its status line.
std::vector<std::string>& details() {
    static std::vector<std::string> lines;
    return lines;
}
void detail(const std::string& line) { details().push_back(line); }

// --- shared fixtures -------------------------------------------------------

SyntheticSpec two_vertical_spec() {
    SyntheticSpec spec;
    spec.shapes = {{"alpha", {3, 3, 2}}, {"beta", {3, 3, 3}}};
    spec.hash_dim = 512;
    return spec;
}

struct Bench {
    SyntheticCorpus corpus;
    std::shared_ptr<HashEmbedder> embedder;
    std::shared_ptr<const ExemplarIndex> index;
    std::shared_ptr<LogitProvider> provider;
    PipelineConfig config;

    std::shared_ptr<Classifier> classifier() const {
        return std::make_shared<Classifier>(config, index, embedder, provider, corpus.catalog);
    }
};

Bench make_bench(const SyntheticSpec& spec, bool token_vectors = false,
                 std::size_t parallelism = 4) {
    Bench bench;
    bench.corpus = generate_synthetic_corpus(spec);
    bench.embedder = std::make_shared<HashEmbedder>(spec.hash_dim, spec.hash_seed);
    bench.index = std::make_shared<const ExemplarIndex>(
        build_index(to_exemplar_pairs(bench.corpus.index_split), *bench.embedder,
                    bench.corpus.catalog, token_vectors));
    bench.provider = std::make_shared<MockLogitProvider>(bench.corpus.scoring_table);
    bench.config.top_k = 10;
    bench.config.batch_parallelism = parallelism;
    return bench;
}

// --- criterion 1: length-normalized scoring against a hand-built oracle -----

void criterion_scoring_oracle() {
    // Conditional weight table written out by hand; candidates are scored by
    // chaining context -> token weights and the oracle recomputes
    // exp(mean(log(weight / row_sum))) from these literals alone.
    const std::map<std::string, std::map<std::string, double>> weights = {
        {"parcel", {{"order", 8}, {"refund", 4}, {"account", 2}}},
        {"order", {{"track", 5}, {"cancel", 3}, {"status", 2}, {"edit", 1}}},
        {"refund", {{"open", 7}, {"close", 1}, {"appeal", 3}, {"history", 2}}},
        {"account", {{"login", 9}, {"logout", 1}, {"delete", 4}, {"update", 6}}},
    };
    BigramTable table;
    for (const auto& [context, row] : weights) {
        for (const auto& [token, weight] : row) table.set(context, token, weight);
    }
    MockLogitProvider provider(table);
    const std::string prompt = "Query: please track my parcel";

    const auto oracle = [&](const std::vector<std::string>& tokens) {
        double sum = 0.0;
        std::string context = "parcel";
        for (const auto& token : tokens) {
            const auto& row = weights.at(context);
            double row_sum = 0.0;
            for (const auto& [_, w] : row) row_sum += w;
            sum += std::log(row.at(token) / row_sum);
            context = token;
        }
        return std::exp(sum / static_cast<double>(tokens.size()));
    };

    const std::vector<std::pair<IntentPath, std::vector<std::string>>> fixtures = {
        {{"shop", {"Order", "Track"}}, {"order", "track"}},
        {{"shop", {"Order", "Cancel"}}, {"order", "cancel"}},
        {{"shop", {"Order", "Status"}}, {"order", "status"}},
        {{"shop", {"Order", "Edit"}}, {"order", "edit"}},
        {{"shop", {"Refund", "Open"}}, {"refund", "open"}},
        {{"shop", {"Refund", "Close"}}, {"refund", "close"}},
        {{"shop", {"Refund", "Appeal"}}, {"refund", "appeal"}},
        {{"shop", {"Refund", "History"}}, {"refund", "history"}},
        {{"shop", {"Account", "Login"}}, {"account", "login"}},
        {{"shop", {"Account", "Logout"}}, {"account", "logout"}},
        {{"shop", {"Account", "Delete"}}, {"account", "delete"}},
        {{"shop", {"Account", "Update"}}, {"account", "update"}},
        {{"shop", {"Order"}}, {"order"}},
        {{"shop", {"Refund"}}, {"refund"}},
    };
    require(fixtures.size() >= 10, "need at least 10 fixture candidates");
    for (const auto& [intent, tokens] : fixtures) {
        const auto scored = score_candidate(provider, prompt, intent);
        const double expected = oracle(tokens);
        const double diff = std::abs(scored.normalized_prob - expected);
        require(diff <= 1e-12, render_intent_path(intent) + ": |" +
                                   fmt(scored.normalized_prob) + " - " + fmt(expected) +
                                   "| = " + fmt(diff) + " > 1e-12");
        require(scored.token_count == tokens.size(),
                render_intent_path(intent) + ": wrong token count");
    }

    // Uniform vocabulary of 4: every candidate must score exactly 1/4
    // no matter its length.
    BigramTable uniform;
    for (const char* tok : {"alpha", "beta", "gamma", "delta"}) uniform.set("", tok, 1.0);
    MockLogitProvider uniform_provider(uniform);
    const std::vector<IntentPath> lengths = {
        {"v", {"Alpha"}},
        {"v", {"Beta", "Gamma"}},
        {"v", {"Beta", "Gamma", "Delta"}},
        {"v", {"Alpha", "Beta", "Gamma", "Delta"}},
    };
    for (const auto& intent : lengths) {
        const auto scored = score_candidate(uniform_provider, prompt, intent);
        require(scored.normalized_prob == 0.25,
                "uniform score for length " + std::to_string(intent.labels.size()) + " is " +
                    fmt(scored.normalized_prob) + ", want exactly 0.25");
    }
    detail("14 hand-evaluated candidates within 1e-12; uniform 1/|V| exact at lengths 1-4");
}

// --- criterion 2: constrained routing under fuzz ----------------------------

void criterion_constrained_routing() {
    const auto bench = make_bench(two_vertical_spec());
    const auto classifier = bench.classifier();
    const auto& catalog = bench.corpus.catalog;

    std::vector<std::string> vocab = bench.corpus.keyword_vocab;
    Rng rng(20260814);
    for (int i = 0; i < 40; ++i) {  // junk tokens foreign to the corpus
        std::string junk;
        for (std::uint64_t n = 3 + rng.below(6); n > 0; --n) {
            junk += static_cast<char>('a' + rng.below(26));
        }
        vocab.push_back(junk);
    }

    constexpr int kQueries = 10000;
    for (int i = 0; i < kQueries; ++i) {
        std::string query;
        for (std::uint64_t n = 1 + rng.below(5); n > 0; --n) {
            if (!query.empty()) query += ' ';
            query += vocab[rng.below(vocab.size())];
        }
        Prediction pred;
        try {
            pred = classifier->classify(query);
        } catch (const std::exception& e) {
            throw AcceptanceFailure("query " + std::to_string(i) + " (\"" + query +
                                    "\") threw: " + e.what());
        }
        const bool member =
            std::any_of(pred.candidates_considered.begin(), pred.candidates_considered.end(),
                        [&](const auto& c) { return c.first == pred.intent; });
        require(member, "prediction for \"" + query + "\" is not a retrieved candidate");
        require(catalog.has_intent(pred.intent),
                "prediction for \"" + query + "\" is not in the catalog");
    }
    detail("10000 fuzzed queries: every prediction in-candidate-set and in-catalog");
}

// --- criterion 3: retrieval exactness ---------------------------------------

void criterion_retrieval_exactness() {
    // Dense: engine top-k must match a from-scratch double-accumulation scan
    // bit for bit, ids and scores.
    constexpr int kDocs = 10000;
    constexpr int kDim = 64;
    Rng rng(7);
    std::vector<ExemplarPair> pairs;
    Matf rows(kDocs, kDim);
    for (int i = 0; i < kDocs; ++i) {
        pairs.push_back({i, "doc " + std::to_string(i), {"v", {"X"}}});
        Vecf v(kDim);
        for (int d = 0; d < kDim; ++d) v(d) = static_cast<float>(rng.real() * 2.0 - 1.0);
        rows.row(i) = unit_normalized(v).transpose();
    }
    const auto index =
        ExemplarIndex::from_parts("accept", kDim, false, std::move(pairs), std::move(rows), {});

    for (const std::uint64_t qseed : {11u, 12u, 13u}) {
        Rng qrng(qseed);
        Vecf q(kDim);
        for (int d = 0; d < kDim; ++d) q(d) = static_cast<float>(qrng.real() * 2.0 - 1.0);
        q = unit_normalized(q);

        // Reference scan, O(n*d), same coefficient order as the engine.
        std::vector<std::pair<double, std::int64_t>> reference;
        for (int i = 0; i < kDocs; ++i) {
            double acc = 0.0;
            for (int d = 0; d < kDim; ++d) {
                acc += static_cast<double>(index.rows()(i, d)) * static_cast<double>(q(d));
            }
            reference.push_back({acc, index.pairs()[static_cast<std::size_t>(i)].id});
        }
        std::sort(reference.begin(), reference.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });

        for (const std::size_t k : {1u, 5u, 10u, 50u}) {
            const auto got = dense_topk(index, q, k);
            require(got.entries.size() == k, "dense_topk returned wrong size");
            for (std::size_t r = 0; r < k; ++r) {
                require(got.entries[r].pair.id == reference[r].second,
                        "dense id mismatch at rank " + std::to_string(r) + " for k=" +
                            std::to_string(k));
                require(got.entries[r].score == reference[r].first,
                        "dense score not bit-identical at rank " + std::to_string(r));
            }
        }
    }

    // BM25 against hand-evaluated Okapi (k1=1.5, b=0.75) on five documents.
    // Expected values were worked out from the formula with df, tf, and
    // doc-length per document (avgdl = 2.8).
    IntentCatalog catalog;
    catalog.add_vertical({"v", "V", {"Leaf"}});
    std::vector<ExemplarPair> docs = {
        {0, "track my order", {"v", {"D0"}}},       {1, "cancel order", {"v", {"D1"}}},
        {2, "reset password now", {"v", {"D2"}}},   {3, "track every package today", {"v", {"D3"}}},
        {4, "refund status", {"v", {"D4"}}},
    };
    for (const auto& doc : docs) catalog.add_intent(doc.intent);
    HashEmbedder embedder(32, 7);
    const auto bm25_index = build_index(docs, embedder, catalog);
    const auto got = bm25_topk(bm25_index, {"track", "order"}, 5);

    const std::map<std::int64_t, double> expected = {
        {0, 1.6964100100975223}, {1, 1.0046362559798852}, {3, 0.7339258876020718}};
    require(got.entries.size() == expected.size(),
            "bm25 returned " + std::to_string(got.entries.size()) + " docs, want 3");
    for (const auto& entry : got.entries) {
        const auto it = expected.find(entry.pair.id);
        require(it != expected.end(),
                "bm25 returned unexpected doc " + std::to_string(entry.pair.id));
        require(std::abs(entry.score - it->second) <= 1e-9,
                "bm25 doc " + std::to_string(entry.pair.id) + ": " + fmt(entry.score) +
                    " vs oracle " + fmt(it->second));
    }
    detail("dense_topk bit-identical to reference scan at k in {1,5,10,50} x 3 queries");
    detail("bm25 within 1e-9 of the hand-evaluated 5-document oracle");
}

// --- criterion 4: batch and upsert equivalences ------------------------------

void criterion_equivalences() {
    const auto bench = make_bench(two_vertical_spec());
    const auto classifier = bench.classifier();
    std::vector<std::string> queries;
    for (const auto& ex : bench.corpus.test_split) queries.push_back(ex.query);

    const auto batch = classifier->classify_batch(queries);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto solo = classifier->classify(queries[i]);
        require(batch[i].prediction.has_value(), "batch item errored: " + batch[i].error);
        require(batch[i].prediction->intent == solo.intent,
                "batch/sequential prediction differs on query " + std::to_string(i));
        require(std::abs(batch[i].prediction->normalized_prob - solo.normalized_prob) <= 1e-12,
                "batch/sequential score differs on query " + std::to_string(i));
    }

    // Same exemplars via one-shot build vs incremental upserts.
    const auto pairs = to_exemplar_pairs(bench.corpus.index_split);
    const auto half = pairs.size() / 2;
    auto grown = build_index({pairs.begin(), pairs.begin() + half}, *bench.embedder,
                             bench.corpus.catalog);
    for (std::size_t i = half; i < pairs.size(); ++i) {
        grown.upsert(pairs[i], *bench.embedder, bench.corpus.catalog);
    }
    Bench upserted = bench;
    upserted.index = std::make_shared<const ExemplarIndex>(std::move(grown));
    const auto via_upsert = upserted.classifier();
    for (const auto& query : queries) {
        const auto a = classifier->classify(query);
        const auto b = via_upsert->classify(query);
        require(a.intent == b.intent, "upsert-built index predicts differently on " + query);
        require(std::abs(a.normalized_prob - b.normalized_prob) <= 1e-12,
                "upsert-built index scores differently on " + query);
    }
    detail(std::to_string(queries.size()) +
           " queries: batch==sequential and upsert-built==batch-built");
}

// --- criterion 5: re-ranking beats the nearest-exemplar baseline --------------

void criterion_reranking_value() {
    SyntheticSpec spec;  // default shapes: ~70 vs ~800 intents
    spec.noise = 0.3;
    const auto bench = make_bench(spec, false, 8);
    const auto classifier = bench.classifier();

    const auto reranked = run_eval(*classifier, bench.corpus.test_split);
    const auto base = run_baseline_nearest(*bench.index, *bench.embedder, bench.config,
                                           bench.corpus.test_split);

    require(reranked.error_rate == 0.0, "re-ranking run had errors");
    require(reranked.micro.precision == reranked.accuracy && reranked.micro.recall == reranked.accuracy,
            "micro precision/recall must equal accuracy");
    require(!reranked.per_vertical.empty(), "per-vertical grid missing");
    for (const auto& id : {"retail", "digital"}) {
        require(reranked.per_vertical.count(id) == 1, std::string("grid missing vertical ") + id);
    }
    const auto parsed = json::parse(reranked.to_json());
    require(parsed.contains("per_vertical") && parsed.contains("per_class"),
            "report JSON lacks the P/R/F1 grid");

    detail("vertical   precision  recall     f1         n");
    for (const auto& [vertical, vm] : reranked.per_vertical) {
        std::ostringstream row;
        row << vertical << std::string(vertical.size() < 11 ? 11 - vertical.size() : 1, ' ')
            << fmt(vm.macro.precision) << "   " << fmt(vm.macro.recall) << "   "
            << fmt(vm.macro.f1) << "   " << vm.support;
        detail(row.str());
    }
    detail("accuracy: re-ranked " + fmt(reranked.accuracy) + " vs nearest-exemplar " +
           fmt(base.accuracy) + " (margin " + fmt(reranked.accuracy - base.accuracy) + ")");
    require(reranked.accuracy >= base.accuracy + 0.05,
            "re-ranked accuracy " + fmt(reranked.accuracy) + " < baseline " + fmt(base.accuracy) +
                " + 0.05");
}

// --- criterion 6: top-k sweep curves ------------------------------------------

void criterion_topk_sweep() {
    SyntheticSpec spec;
    spec.shapes = {{"alpha", {3, 3, 3}}, {"beta", {3, 3, 3, 3}}};  // 108 intents
    spec.templates_per_intent = 1;  // scored candidates == k exactly
    spec.noise = 0.25;
    spec.hash_dim = 512;
    auto bench = make_bench(spec);
    bench.provider = std::make_shared<DelayLogitProvider>(bench.provider, 200);
    const auto classifier = bench.classifier();

    const std::vector<std::size_t> ks = {1, 2, 5, 10, 20, 50};
    const auto rows = run_topk_sweep(*classifier, ks, bench.corpus.test_split);
    require(rows.size() == ks.size(), "sweep row count mismatch");

    const auto doc = json::parse(sweep_to_json(rows));
    for (const auto& row : doc) {
        require(row.contains("gold_coverage") && row.contains("scoring_ms"),
                "sweep report lacks the coverage or latency series");
    }

    detail("    k  coverage   scoring p50 ms");
    for (const auto& row : rows) {
        std::ostringstream line;
        line << std::setw(5) << row.k << "  " << fmt(row.gold_coverage) << "      "
             << fmt(row.scoring_latency.p50_ms);
        detail(line.str());
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].mean_candidates == static_cast<double>(ks[i]),
                "scored candidates != k at k=" + std::to_string(ks[i]));
        if (i == 0) continue;
        require(rows[i].gold_coverage >= rows[i - 1].gold_coverage,
                "gold coverage decreased at k=" + std::to_string(ks[i]));
        require(rows[i].scoring_latency.p50_ms > rows[i - 1].scoring_latency.p50_ms,
                "scoring latency not increasing at k=" + std::to_string(ks[i]));
    }
}

// --- criterion 7: retriever ablation -------------------------------------------

void criterion_retriever_ablation() {
    // Paraphrase corpus: test keywords are rewritten to synonyms that share
    // no surface tokens with the indexed exemplars but hash to the same
    // signed bucket, so term matching starves while embeddings are unmoved.
    SyntheticSpec spec = two_vertical_spec();
    spec.paraphrase = true;
    const auto corpus = generate_synthetic_corpus(spec);
    const auto embedder = std::make_shared<HashEmbedder>(spec.hash_dim, spec.hash_seed);
    const auto provider = std::make_shared<MockLogitProvider>(corpus.scoring_table);
    const auto plain = std::make_shared<const ExemplarIndex>(
        build_index(to_exemplar_pairs(corpus.index_split), *embedder, corpus.catalog, false));
    const auto with_tokens = std::make_shared<const ExemplarIndex>(
        build_index(to_exemplar_pairs(corpus.index_split), *embedder, corpus.catalog, true));

    std::map<std::string, EvalReport> reports;
    for (const std::string name : {"bm25", "dense", "maxsim"}) {
        PipelineConfig config;
        config.top_k = 10;
        config.batch_parallelism = 4;
        config.retriever = retriever_kind_from_string(name);
        const auto index = config.retriever == RetrieverKind::maxsim ? with_tokens : plain;
        Classifier classifier(config, index, embedder, provider, corpus.catalog);
        reports.emplace(name, run_eval(classifier, corpus.test_split));
        require(reports.at(name).micro.precision == reports.at(name).accuracy,
                name + ": micro precision must equal accuracy");
    }

    detail("retriever  accuracy   error rate");
    for (const auto& [name, report] : reports) {
        std::ostringstream row;
        row << name << std::string(11 - name.size(), ' ') << fmt(report.accuracy) << "      "
            << fmt(report.error_rate);
        detail(row.str());
    }
    require(reports.at("dense").accuracy > reports.at("bm25").accuracy,
            "dense (" + fmt(reports.at("dense").accuracy) + ") must beat bm25 (" +
                fmt(reports.at("bm25").accuracy) + ") on the paraphrase corpus");
}

// --- criterion 8: live upsert flips a prediction --------------------------------

void criterion_live_update() {
    auto bench = make_bench(two_vertical_spec());
    const IntentPath target = bench.corpus.catalog.intents().front();
    ExemplarPair held_out;
    auto pairs = to_exemplar_pairs(bench.corpus.index_split);
    for (const auto& pair : pairs) {
        if (pair.intent == target) {
            held_out = pair;
            break;
        }
    }
    require(!held_out.query.empty(), "no exemplar found for the target intent");
    std::erase_if(pairs, [&](const ExemplarPair& p) { return p.intent == target; });
    bench.index = std::make_shared<const ExemplarIndex>(
        build_index(std::move(pairs), *bench.embedder, bench.corpus.catalog));

    ServiceConfig config;
    config.auth_token_env = "";
    ClassificationService service(config, bench.classifier(), bench.embedder);
    const int port = service.start();
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(10, 0);

    const json probe{{"query", held_out.query}};
    auto before = cli.Post("/classify", probe.dump(), "application/json");
    require(before && before->status == 200, "pre-upsert classify failed");
    const auto before_intent = json::parse(before->body)["intent"]["path"].get<std::string>();
    require(before_intent != render_intent_path(target),
            "intent already predicted before its exemplar existed");

    const json upsert{{"id", held_out.id},
                      {"query", held_out.query},
                      {"vertical", target.vertical_id},
                      {"intent", render_intent_path(target)}};
    auto ack = cli.Post("/index/upsert", upsert.dump(), "application/json");
    require(ack && ack->status == 200, "upsert failed");

    auto after = cli.Post("/classify", probe.dump(), "application/json");
    require(after && after->status == 200, "post-upsert classify failed");
    const auto after_intent = json::parse(after->body)["intent"]["path"].get<std::string>();
    require(after_intent == render_intent_path(target),
            "prediction did not flip to the upserted intent (got " + after_intent + ")");
    service.stop();
    detail("\"" + held_out.query + "\": " + before_intent + " -> " + after_intent +
           " with no restart");
}

// --- criterion 9: service equals the library ------------------------------------

void criterion_service_equivalence() {
    const auto bench = make_bench(two_vertical_spec());
    const auto classifier = bench.classifier();
    ServiceConfig config;
    config.auth_token_env = "";
    ClassificationService service(config, classifier, bench.embedder);
    const int port = service.start();
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(10, 0);

    require(bench.corpus.test_split.size() >= 50, "need 50 fixture queries");
    for (std::size_t i = 0; i < 50; ++i) {
        const auto& query = bench.corpus.test_split[i].query;
        auto res = cli.Post("/classify", json{{"query", query}}.dump(), "application/json");
        require(res && res->status == 200, "service classify failed on query " +
                                               std::to_string(i));
        auto remote = json::parse(res->body);
        auto local = json::parse(prediction_to_json(classifier->classify(query)));
        for (auto* doc : {&remote, &local}) {
            doc->erase("retrieval_ms");
            doc->erase("scoring_ms");
        }
        require(remote == local, "service and library disagree on \"" + query + "\"");
    }
    service.stop();
    detail("50 POST /classify responses field-for-field equal to in-process predictions");
}

// --- criterion 10: metrics oracle -------------------------------------------------

void criterion_metrics_oracle() {
    const IntentPath a{"v", {"A"}};
    const IntentPath b{"v", {"B"}};
    const auto report = compute_metrics({a, b, b}, {a, a, b});

    require(report.total == 3, "wrong total");
    require(report.accuracy == 2.0 / 3.0, "accuracy must be exactly 2/3");
    require(report.per_class.size() == 2, "expected two classes");
    for (const auto& cm : report.per_class) {
        require(cm.f1 == 2.0 / 3.0,
                "class " + render_intent_path(cm.intent) + " F1 must be exactly 2/3, got " +
                    fmt(cm.f1));
    }
    require(report.per_class[0].precision == 1.0 && report.per_class[0].recall == 0.5,
            "class A precision/recall mismatch");
    require(report.per_class[1].precision == 0.5 && report.per_class[1].recall == 1.0,
            "class B precision/recall mismatch");

    // Single-label micro pooling collapses to accuracy; check on this case
    // and on a full synthetic run.
    require(report.micro.precision == report.accuracy && report.micro.recall == report.accuracy,
            "micro P/R must equal accuracy bitwise");
    const auto bench = make_bench(two_vertical_spec());
    const auto synthetic = run_eval(*bench.classifier(), bench.corpus.test_split);
    require(synthetic.micro.precision == synthetic.accuracy &&
                synthetic.micro.recall == synthetic.accuracy,
            "micro P/R must equal accuracy on a synthetic run");
    detail("confusion case exact (F1 = 2/3, accuracy = 2/3); micro P == micro R == accuracy");
}

struct Criterion {
    int id;
    const char* title;
    double budget_s;
    std::function<void()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "length-normalized scoring matches the hand-built oracle", 1.0,
         criterion_scoring_oracle},
        {2, "constrained routing holds over 10000 fuzzed queries", 60.0,
         criterion_constrained_routing},
        {3, "retrieval exact against brute-force and Okapi oracles", 30.0,
         criterion_retrieval_exactness},
        {4, "batch and upsert paths are equivalent", 300.0, criterion_equivalences},
        {5, "re-ranking beats the nearest-exemplar baseline by 5 points", 300.0,
         criterion_reranking_value},
        {6, "top-k sweep: coverage non-decreasing, latency increasing", 300.0,
         criterion_topk_sweep},
        {7, "retriever ablation completes; dense beats bm25 on paraphrases", 300.0,
         criterion_retriever_ablation},
        {8, "live upsert flips an unknown intent's prediction", 10.0, criterion_live_update},
        {9, "service responses equal in-process predictions", 300.0,
         criterion_service_equivalence},
        {10, "metrics match the hand-computed confusion case", 300.0,
         criterion_metrics_oracle},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string error;
        try {
            criterion.run();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (error.empty() && elapsed > criterion.budget_s) {
            error = "exceeded time budget: " + fmt(elapsed) + "s > " + fmt(criterion.budget_s) +
                    "s";
        }
        if (error.empty()) {
            std::printf("PASS  %2d  %s (%.2fs)\n", criterion.id, criterion.title, elapsed);
        } else {
            ++failures;
            std::printf("FAIL  %2d  %s (%.2fs)\n      %s\n", criterion.id, criterion.title,
                        elapsed, error.c_str());
        }
        for (const auto& line : details()) std::printf("        %s\n", line.c_str());
        details().clear();
        std::fflush(stdout);
    }
    if (failures) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
