#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "icr/common.hpp"
#include "icr/retrieval.hpp"
#include "icr/scoring.hpp"
#include "icr/taxonomy.hpp"
#include "icr/textproc.hpp"
#include "support.hpp"

using namespace icr;
using nlohmann::json;

namespace {

CandidateSet make_candidates(std::vector<CandidateSet::Entry> entries) {
    const std::size_t k = entries.size();
    return CandidateSet::from_scored(std::move(entries), k);
}

// Three-row table used by the hand-worked oracle below. Row sums: "" is 8,
// "order" is 4, "track" is 8.
BigramTable demo_table() {
    BigramTable t;
    t.set("", "order", 4.0);
    t.set("", "track", 2.0);
    t.set("", "cancel", 1.0);
    t.set("", "status", 1.0);
    t.set("order", "track", 3.0);
    t.set("order", "cancel", 1.0);
    t.set("track", "status", 2.0);
    t.set("track", "order", 6.0);
    return t;
}

}  // namespace

TEST_CASE("prompt rendering is deterministic and ordered") {
    CandidateSet cs = make_candidates({
        {{7, "track my order", {"3p", {"Order", "Track"}}}, 0.9},
        {{3, "cancel it", {"3p", {"Order", "Cancel"}}}, 0.8},
        {{9, "follow my order", {"3p", {"Order", "Track"}}}, 0.7},
    });
    REQUIRE(cs.unique_intents.size() == 2);

    const std::string prompt = render_prompt(PromptTemplate::standard(), "where is my order", cs);
    CHECK(prompt == render_prompt(PromptTemplate::standard(), "where is my order", cs));
    CHECK(prompt.ends_with("where is my order"));

    const auto first = prompt.find("track my order => Order > Track");
    const auto second = prompt.find("cancel it => Order > Cancel");
    const auto third = prompt.find("follow my order => Order > Track");
    REQUIRE(first != std::string::npos);
    REQUIRE(second != std::string::npos);
    REQUIRE(third != std::string::npos);
    CHECK(first < second);
    CHECK(second < third);

    // candidate list follows unique_intents order and the query comes last
    const auto cand_track = prompt.find("Candidate: Order > Track");
    const auto cand_cancel = prompt.find("Candidate: Order > Cancel");
    REQUIRE(cand_track != std::string::npos);
    REQUIRE(cand_cancel != std::string::npos);
    CHECK(cand_track < cand_cancel);
    CHECK(cand_cancel < prompt.find("Query: where is my order"));

    CHECK_THROWS_AS(render_prompt(PromptTemplate::standard(), "q", CandidateSet{}),
                    NoCandidatesError);
}

TEST_CASE("prompt keeps all ten exemplars in rank order") {
    std::vector<CandidateSet::Entry> entries;
    for (int i = 0; i < 10; ++i) {
        entries.push_back({{i, "query number " + std::to_string(i), {"3p", {"Order", "Track"}}},
                           1.0 - 0.05 * i});
    }
    CandidateSet cs = make_candidates(std::move(entries));
    const std::string prompt = render_prompt(PromptTemplate::standard(), "final query", cs);

    // parse the rendered prompt back and compare the exemplar sequence
    std::vector<std::string> seen;
    std::size_t pos = 0;
    while (true) {
        const auto at = prompt.find("Example: ", pos);
        if (at == std::string::npos) break;
        const auto end = prompt.find(" =>", at);
        seen.push_back(prompt.substr(at + 9, end - at - 9));
        pos = at + 1;
    }
    REQUIRE(seen.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(seen[static_cast<std::size_t>(i)] == "query number " + std::to_string(i));
}

TEST_CASE("uniform table scores candidates of any length identically") {
    BigramTable t;
    for (const char* tok : {"alpha", "beta", "gamma", "delta"}) t.set("", tok, 0.25);
    MockLogitProvider provider(std::move(t));

    const std::string prompt = "Query: route this please";
    std::vector<SequenceScore> scores;
    scores.push_back(score_candidate(provider, prompt, {"v", {"Alpha"}}));
    scores.push_back(score_candidate(provider, prompt, {"v", {"Beta", "Gamma"}}));
    scores.push_back(score_candidate(provider, prompt, {"v", {"Beta", "Gamma", "Delta"}}));
    scores.push_back(score_candidate(provider, prompt, {"v", {"Alpha", "Beta", "Gamma", "Delta"}}));

    CHECK(scores[0].token_count == 1);
    CHECK(scores[3].token_count == 4);
    for (const auto& s : scores) {
        // every per-token log-prob is the same double, so the geometric mean
        // recovers it exactly and length cannot influence the score
        CHECK(s.normalized_prob == 0.25);
    }
}

TEST_CASE("delta table scores the forced continuation at probability one") {
    BigramTable t;
    t.set("order", "track", 0.7);
    t.set("track", "status", 0.7);
    MockLogitProvider provider(std::move(t));

    SequenceScore s =
        score_candidate(provider, "Query: about my order", {"3p", {"Track", "Status"}});
    CHECK(s.token_count == 2);
    CHECK(s.sum_logprob == 0.0);
    CHECK(s.normalized_prob == 1.0);
}

TEST_CASE("hand-worked bigram lookups match scores to 1e-12") {
    MockLogitProvider provider(demo_table());
    const std::string prompt = "Query: where is my order";

    // log(3/4), log(2/8) and friends evaluated independently and frozen
    SequenceScore a = score_candidate(provider, prompt, {"3p", {"Track", "Status"}});
    CHECK(a.token_count == 2);
    CHECK(a.sum_logprob == doctest::Approx(-1.6739764335716711).epsilon(1e-12));
    CHECK(a.normalized_prob == doctest::Approx(0.4330127018922194).epsilon(1e-12));

    SequenceScore b = score_candidate(provider, prompt, {"3p", {"Cancel"}});
    CHECK(b.normalized_prob == doctest::Approx(0.25).epsilon(1e-12));

    SequenceScore c = score_candidate(provider, prompt, {"3p", {"Track", "Order"}});
    CHECK(c.normalized_prob == doctest::Approx(0.7500000000000001).epsilon(1e-12));

    CHECK(a.normalized_prob == doctest::Approx(std::exp(a.sum_logprob / 2.0)).epsilon(1e-12));
}

TEST_CASE("scaling every table weight leaves scores unchanged") {
    // multiplying weights by a constant shifts every logit by log(c), which
    // log-softmax must cancel
    const double c = 7.3;
    BigramTable scaled;
    scaled.set("", "order", 4.0 * c);
    scaled.set("", "track", 2.0 * c);
    scaled.set("", "cancel", 1.0 * c);
    scaled.set("", "status", 1.0 * c);
    scaled.set("order", "track", 3.0 * c);
    scaled.set("order", "cancel", 1.0 * c);
    scaled.set("track", "status", 2.0 * c);
    scaled.set("track", "order", 6.0 * c);
    MockLogitProvider base(demo_table());
    MockLogitProvider shifted(std::move(scaled));

    const std::string prompt = "Query: where is my order";
    for (const IntentPath& intent :
         {IntentPath{"3p", {"Track", "Status"}}, IntentPath{"3p", {"Cancel"}},
          IntentPath{"3p", {"Track", "Order"}}}) {
        SequenceScore u = score_candidate(base, prompt, intent);
        SequenceScore v = score_candidate(shifted, prompt, intent);
        CHECK(std::abs(u.normalized_prob - v.normalized_prob) <= 1e-9);
        CHECK(std::abs(u.sum_logprob - v.sum_logprob) <= 1e-9);
    }
}

TEST_CASE("mock_logits selects rows with unigram backoff and normalizes") {
    BigramTable t = demo_table();
    const std::vector<std::string> vocab = t.vocabulary();
    CHECK(std::is_sorted(vocab.begin(), vocab.end()));

    // known context: row served verbatim, softmax mass sums to 1
    std::vector<double> row = mock_logits(t, {"where", "my", "order"});
    REQUIRE(row.size() == vocab.size());
    double mass = 0.0;
    for (double lp : row) {
        if (std::isinf(lp)) continue;
        mass += std::exp(lp);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));

    const auto at = [&](const std::string& tok) {
        return static_cast<std::size_t>(std::find(vocab.begin(), vocab.end(), tok) - vocab.begin());
    };
    CHECK(row[at("track")] == std::log(3.0) - std::log(4.0));
    CHECK(std::isinf(row[at("status")]));

    // empty and out-of-vocabulary contexts fall back to the unigram row
    std::vector<double> uni = mock_logits(t, {});
    CHECK(uni == mock_logits(t, {"unseen"}));
    CHECK(uni[at("order")] == std::log(4.0) - std::log(8.0));
    double uni_mass = 0.0;
    for (double lp : uni) uni_mass += std::exp(lp);
    CHECK(uni_mass == doctest::Approx(1.0).epsilon(1e-9));

    BigramTable no_backoff;
    no_backoff.set("order", "track", 1.0);
    CHECK_THROWS_AS(mock_logits(no_backoff, {"unseen"}), ProviderError);

    // the provider's per-token values are exactly the vector's entries
    MockLogitProvider provider(demo_table());
    std::vector<double> lps = provider.token_logprobs("where is my order", "track status");
    CHECK(lps[0] == row[at("track")]);
    CHECK(lps[1] == mock_logits(t, {"track"})[at("status")]);
}

TEST_CASE("score_all equals sequential scoring and dedups intents") {
    MockLogitProvider provider(demo_table());
    CandidateSet cs = make_candidates({
        {{1, "track my order", {"3p", {"Track", "Status"}}}, 0.9},
        {{2, "cancel please", {"3p", {"Cancel"}}}, 0.8},
        {{3, "order tracking", {"3p", {"Track", "Status"}}}, 0.7},
        {{4, "track the order", {"3p", {"Track", "Order"}}}, 0.6},
    });
    REQUIRE(cs.unique_intents.size() == 3);

    const std::string prompt = render_prompt(PromptTemplate::standard(), "my order", cs);
    std::vector<SequenceScore> batch = score_all(provider, prompt, cs);
    REQUIRE(batch.size() == 3);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        SequenceScore single = score_candidate(provider, prompt, cs.unique_intents[i], i);
        CHECK(batch[i].intent == single.intent);
        CHECK(batch[i].token_count == single.token_count);
        CHECK(batch[i].sum_logprob == single.sum_logprob);
        CHECK(batch[i].normalized_prob == single.normalized_prob);
        CHECK(batch[i].candidate_rank == i);
    }

    CHECK_THROWS_AS(score_all(provider, prompt, CandidateSet{}), NoCandidatesError);
}

TEST_CASE("rank_scores is argmax-first with candidate-order ties") {
    auto mk = [](double prob, std::size_t rank) {
        SequenceScore s;
        s.intent = {"v", {"I" + std::to_string(rank)}};
        s.normalized_prob = prob;
        s.candidate_rank = rank;
        return s;
    };
    std::vector<SequenceScore> scores = {mk(0.2, 0), mk(0.7, 1), mk(0.1, 2)};
    CHECK(rank_scores(scores)[0].candidate_rank == 1);

    // exact tie keeps first-appearance order
    std::vector<SequenceScore> tied = {mk(0.4, 0), mk(0.7, 1), mk(0.7, 2), mk(0.1, 3)};
    std::vector<SequenceScore> baseline = rank_scores(tied);
    CHECK(baseline[0].candidate_rank == 1);
    CHECK(baseline[1].candidate_rank == 2);

    // every input permutation ranks identically
    std::vector<std::size_t> order = {0, 1, 2, 3};
    do {
        std::vector<SequenceScore> shuffled;
        for (std::size_t i : order) shuffled.push_back(tied[i]);
        std::vector<SequenceScore> ranked = rank_scores(shuffled);
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            CHECK(ranked[i].candidate_rank == baseline[i].candidate_rank);
        }
    } while (std::next_permutation(order.begin(), order.end()));

    CHECK_THROWS_AS(rank_scores({}), ValidationError);
}

TEST_CASE("provider errors name the failing intent") {
    MockLogitProvider provider(demo_table());
    CandidateSet cs = make_candidates({
        {{1, "track it", {"3p", {"Track", "Status"}}}, 0.9},
        {{2, "weird", {"3p", {"Missing", "Intent"}}}, 0.8},
    });
    const std::string prompt = "Query: my order";
    try {
        score_all(provider, prompt, cs);
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(std::string(e.what()).find("Missing > Intent") != std::string::npos);
        CHECK(!e.retryable());
    }
}

TEST_CASE("untokenizable continuations are rejected") {
    MockLogitProvider provider(demo_table());
    CHECK_THROWS_AS(score_candidate(provider, "Query: q", {"v", {"???"}}), ValidationError);
}

TEST_CASE("bigram table round-trips through JSON and validates input") {
    BigramTable t = demo_table();
    BigramTable back = BigramTable::from_json(t.to_json());
    CHECK(back.vocabulary() == t.vocabulary());
    const auto* row = back.row("order");
    REQUIRE(row != nullptr);
    CHECK(row->at("track") == 3.0);
    CHECK(back.row_sum(*row) == 4.0);
    CHECK(back.row("nope") == nullptr);

    CHECK_THROWS_AS(BigramTable::from_json("[]"), ConfigError);
    CHECK_THROWS_AS(BigramTable::from_json("{\"a\": 1}"), ConfigError);
    CHECK_THROWS_AS(BigramTable::from_json("{\"a\": {\"b\": -1}}"), ConfigError);
    CHECK_THROWS_AS(BigramTable::from_json("{\"a\": {\"b\": 0}}"), ConfigError);
    CHECK_THROWS_AS(BigramTable::from_json("{\"a\": {\"b\": \"x\"}}"), ConfigError);
    CHECK_THROWS_AS(BigramTable::from_json("not json"), ConfigError);

    BigramTable counted = BigramTable::from_sequences({{"a", "b"}, {"a", "c"}, {"a", "b"}});
    const auto* arow = counted.row("a");
    REQUIRE(arow != nullptr);
    CHECK(arow->at("b") == 2.0);
    CHECK(arow->at("c") == 1.0);
    const auto* urow = counted.row("");
    REQUIRE(urow != nullptr);
    CHECK(urow->at("a") == 3.0);
    CHECK(counted.row_sum(*urow) == 6.0);
}

TEST_CASE("candidate softmax is a normalized reporting view") {
    MockLogitProvider provider(demo_table());
    CandidateSet cs = make_candidates({
        {{1, "track it", {"3p", {"Track", "Status"}}}, 0.9},
        {{2, "cancel", {"3p", {"Cancel"}}}, 0.8},
        {{3, "track order", {"3p", {"Track", "Order"}}}, 0.7},
    });
    std::vector<SequenceScore> scores = score_all(provider, "Query: my order", cs);
    std::vector<double> probs = candidate_softmax(scores);
    REQUIRE(probs.size() == 3);
    CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    // the raw ranking and the softmax view agree on the winner
    const auto best = static_cast<std::size_t>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
    CHECK(rank_scores(scores)[0].candidate_rank == best);
    CHECK(candidate_softmax({}).empty());
}

TEST_CASE("remote logit provider speaks the wire contract") {
    icr::testing::TestHttpServer server([&](httplib::Server& s) {
        s.Post("/logprobs", [&](const httplib::Request& req, httplib::Response& res) {
            auto body = json::parse(req.body);
            REQUIRE(body.contains("model"));
            REQUIRE(body.contains("prompt"));
            REQUIRE(body.contains("continuation"));
            res.set_content(json{{"token_logprobs", {-0.5, -0.25}}}.dump(), "application/json");
        });
        s.Post("/positive", [&](const httplib::Request&, httplib::Response& res) {
            res.set_content(json{{"token_logprobs", {0.5}}}.dump(), "application/json");
        });
        s.Post("/empty", [&](const httplib::Request&, httplib::Response& res) {
            res.set_content(json{{"token_logprobs", json::array()}}.dump(), "application/json");
        });
        s.Post("/flaky", [&](const httplib::Request&, httplib::Response& res) {
            res.status = 500;
            res.set_content("boom", "text/plain");
        });
    });

    LogitProviderSpec spec;
    spec.kind = LogitProviderSpec::Kind::remote;
    spec.model = "test-lm";
    spec.endpoint = server.url("/logprobs");
    spec.max_retries = 1;

    RemoteLogitProvider remote(spec);
    std::vector<double> lps = remote.token_logprobs("p", "c");
    REQUIRE(lps.size() == 2);
    CHECK(lps[0] == -0.5);
    CHECK(lps[1] == -0.25);

    SequenceScore s = score_candidate(remote, "p", {"v", {"Any", "Intent"}});
    CHECK(s.token_count == 2);
    CHECK(s.normalized_prob == doctest::Approx(std::exp(-0.375)).epsilon(1e-12));

    spec.endpoint = server.url("/positive");
    CHECK_THROWS_AS(RemoteLogitProvider(spec).token_logprobs("p", "c"), ProviderError);
    spec.endpoint = server.url("/empty");
    CHECK_THROWS_AS(RemoteLogitProvider(spec).token_logprobs("p", "c"), ProviderError);

    spec.endpoint = server.url("/flaky");
    try {
        RemoteLogitProvider(spec).token_logprobs("p", "c");
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.retryable());
    }

    CHECK_THROWS_AS(([&] {
                        LogitProviderSpec bad;
                        bad.kind = LogitProviderSpec::Kind::remote;
                        bad.endpoint = "no-scheme";
                        RemoteLogitProvider p(bad);
                    }()),
                    ConfigError);
}
