#include "icr/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "icr/common.hpp"

namespace icr {

namespace {

using nlohmann::json;

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

json aggregate_to_json(const Aggregate& a) {
    return json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

json latency_to_json(const LatencyStats& l) {
    return json{{"p50_ms", l.p50_ms}, {"p95_ms", l.p95_ms}, {"mean_ms", l.mean_ms}};
}

std::string summarize(const PipelineConfig& config) {
    std::ostringstream out;
    out << "retriever=" << to_string(config.retriever) << " top_k=" << config.top_k;
    if (config.vertical) out << " vertical=" << *config.vertical;
    out << " hierarchical=" << (config.hierarchical ? "true" : "false");
    if (std::isfinite(config.min_similarity)) out << " min_similarity=" << config.min_similarity;
    out << " scorer_retries=" << config.scorer_retries
        << " parallelism=" << config.batch_parallelism;
    return out.str();
}

}  // namespace

std::string examples_to_jsonl(const std::vector<LabeledExample>& examples) {
    std::ostringstream out;
    for (const auto& ex : examples) {
        json row{{"query", ex.query},
                 {"vertical", ex.gold.vertical_id},
                 {"intent", render_intent_path(ex.gold)},
                 {"split", ex.split}};
        out << row.dump() << '\n';
    }
    return out.str();
}

std::vector<LabeledExample> examples_from_jsonl(const std::string& jsonl_text) {
    std::vector<LabeledExample> out;
    std::istringstream in(jsonl_text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            throw ConfigError("examples line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!row.is_object() || !row.contains("query") || !row.contains("vertical") ||
            !row.contains("intent")) {
            throw ConfigError("examples line " + std::to_string(line_no) +
                              ": need query, vertical, intent");
        }
        LabeledExample ex;
        ex.query = row.at("query").get<std::string>();
        ex.gold.vertical_id = row.at("vertical").get<std::string>();
        std::istringstream labels(row.at("intent").get<std::string>());
        std::string label;
        while (std::getline(labels, label, '>')) {
            const auto b = label.find_first_not_of(" \t");
            const auto e = label.find_last_not_of(" \t");
            if (b == std::string::npos) {
                throw ConfigError("examples line " + std::to_string(line_no) + ": empty label");
            }
            ex.gold.labels.push_back(label.substr(b, e - b + 1));
        }
        ex.split = row.value("split", std::string("test"));
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<ExemplarPair> to_exemplar_pairs(const std::vector<LabeledExample>& examples) {
    std::vector<ExemplarPair> pairs;
    pairs.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        pairs.push_back({static_cast<std::int64_t>(i), examples[i].query, examples[i].gold});
    }
    return pairs;
}

LatencyStats latency_stats(std::vector<double> samples_ms) {
    LatencyStats stats;
    if (samples_ms.empty()) return stats;
    std::sort(samples_ms.begin(), samples_ms.end());
    const auto nearest_rank = [&](double q) {
        const auto n = static_cast<double>(samples_ms.size());
        auto idx = static_cast<std::size_t>(std::ceil(q * n));
        idx = std::min(std::max<std::size_t>(idx, 1), samples_ms.size());
        return samples_ms[idx - 1];
    };
    stats.p50_ms = nearest_rank(0.50);
    stats.p95_ms = nearest_rank(0.95);
    double sum = 0.0;
    for (double v : samples_ms) sum += v;
    stats.mean_ms = sum / static_cast<double>(samples_ms.size());
    return stats;
}

EvalReport compute_metrics(const std::vector<IntentPath>& predictions,
                           const std::vector<IntentPath>& golds) {
    if (predictions.size() != golds.size()) {
        throw ValidationError("compute_metrics: " + std::to_string(predictions.size()) +
                              " predictions vs " + std::to_string(golds.size()) + " golds");
    }

    struct Counts {
        std::size_t tp = 0, fp = 0, fn = 0, support = 0;
    };
    const auto tally = [](const std::vector<IntentPath>& preds, const std::vector<IntentPath>& gold,
                          const std::vector<std::size_t>& rows) {
        std::map<IntentPath, Counts> by_class;
        std::size_t correct = 0;
        for (std::size_t i : rows) {
            by_class[gold[i]].support += 1;
            if (preds[i] == gold[i]) {
                by_class[gold[i]].tp += 1;
                ++correct;
            } else {
                by_class[preds[i]].fp += 1;
                by_class[gold[i]].fn += 1;
            }
        }
        return std::pair(std::move(by_class), correct);
    };
    const auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    const auto f1_of = [](double p, double r) { return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r); };

    EvalReport report;
    report.total = golds.size();

    std::vector<std::size_t> all_rows(golds.size());
    for (std::size_t i = 0; i < golds.size(); ++i) all_rows[i] = i;
    auto [by_class, correct] = tally(predictions, golds, all_rows);

    std::size_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
    for (const auto& [intent, c] : by_class) {
        ClassMetrics cm;
        cm.intent = intent;
        cm.precision = ratio(c.tp, c.tp + c.fp);
        cm.recall = ratio(c.tp, c.tp + c.fn);
        cm.f1 = f1_of(cm.precision, cm.recall);
        cm.support = c.support;
        report.per_class.push_back(std::move(cm));
        tp_sum += c.tp;
        fp_sum += c.fp;
        fn_sum += c.fn;
        report.macro.precision += report.per_class.back().precision;
        report.macro.recall += report.per_class.back().recall;
        report.macro.f1 += report.per_class.back().f1;
    }
    if (!report.per_class.empty()) {
        const auto n = static_cast<double>(report.per_class.size());
        report.macro.precision /= n;
        report.macro.recall /= n;
        report.macro.f1 /= n;
    }
    report.micro.precision = ratio(tp_sum, tp_sum + fp_sum);
    report.micro.recall = ratio(tp_sum, tp_sum + fn_sum);
    report.micro.f1 = f1_of(report.micro.precision, report.micro.recall);
    report.accuracy = ratio(correct, golds.size());

    std::map<std::string, std::vector<std::size_t>> rows_by_vertical;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        rows_by_vertical[golds[i].vertical_id].push_back(i);
    }
    for (const auto& [vertical, rows] : rows_by_vertical) {
        auto [vclasses, vcorrect] = tally(predictions, golds, rows);
        VerticalMetrics vm;
        vm.support = rows.size();
        vm.accuracy = ratio(vcorrect, rows.size());
        std::size_t vtp = 0, vfp = 0, vfn = 0;
        for (const auto& [intent, c] : vclasses) {
            const double p = ratio(c.tp, c.tp + c.fp);
            const double r = ratio(c.tp, c.tp + c.fn);
            vm.macro.precision += p;
            vm.macro.recall += r;
            vm.macro.f1 += f1_of(p, r);
            vtp += c.tp;
            vfp += c.fp;
            vfn += c.fn;
        }
        if (!vclasses.empty()) {
            const auto n = static_cast<double>(vclasses.size());
            vm.macro.precision /= n;
            vm.macro.recall /= n;
            vm.macro.f1 /= n;
        }
        vm.micro.precision = ratio(vtp, vtp + vfp);
        vm.micro.recall = ratio(vtp, vtp + vfn);
        vm.micro.f1 = f1_of(vm.micro.precision, vm.micro.recall);
        report.per_vertical[vertical] = vm;

        std::size_t depth = 0;
        for (std::size_t i : rows) depth = std::max(depth, golds[i].labels.size());
        std::vector<double> prefix_acc(depth, 0.0);
        for (std::size_t level = 1; level <= depth; ++level) {
            std::size_t eligible = 0, matched = 0;
            for (std::size_t i : rows) {
                if (golds[i].labels.size() < level) continue;
                ++eligible;
                const auto& pred = predictions[i];
                if (pred.vertical_id != golds[i].vertical_id || pred.labels.size() < level) {
                    continue;
                }
                if (std::equal(pred.labels.begin(), pred.labels.begin() + level,
                               golds[i].labels.begin())) {
                    ++matched;
                }
            }
            prefix_acc[level - 1] = ratio(matched, eligible);
        }
        report.prefix_accuracy[vertical] = std::move(prefix_acc);
    }
    return report;
}

std::string EvalReport::to_json() const {
    json doc;
    doc["accuracy"] = accuracy;
    doc["total"] = total;
    doc["micro"] = aggregate_to_json(micro);
    doc["macro"] = aggregate_to_json(macro);
    doc["per_class"] = json::array();
    for (const auto& cm : per_class) {
        doc["per_class"].push_back(json{{"vertical", cm.intent.vertical_id},
                                        {"intent", render_intent_path(cm.intent)},
                                        {"precision", cm.precision},
                                        {"recall", cm.recall},
                                        {"f1", cm.f1},
                                        {"support", cm.support}});
    }
    doc["per_vertical"] = json::object();
    for (const auto& [vertical, vm] : per_vertical) {
        doc["per_vertical"][vertical] = json{{"accuracy", vm.accuracy},
                                             {"support", vm.support},
                                             {"micro", aggregate_to_json(vm.micro)},
                                             {"macro", aggregate_to_json(vm.macro)}};
    }
    doc["prefix_accuracy"] = prefix_accuracy;
    doc["latency_ms"] = json{{"retrieval", latency_to_json(retrieval_latency)},
                             {"scoring", latency_to_json(scoring_latency)}};
    doc["fallback_rate"] = fallback_rate;
    doc["error_rate"] = error_rate;
    doc["config"] = config_summary;
    return doc.dump(2);
}

std::string EvalReport::to_csv() const {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "vertical,intent,precision,recall,f1,support\n";
    for (const auto& cm : per_class) {
        out << csv_escape(cm.intent.vertical_id) << ',' << csv_escape(render_intent_path(cm.intent))
            << ',' << cm.precision << ',' << cm.recall << ',' << cm.f1 << ',' << cm.support << '\n';
    }
    out << "__overall__,," << micro.precision << ',' << micro.recall << ',' << micro.f1 << ','
        << total << '\n';
    return out.str();
}

// --- synthetic benchmark -------------------------------------------------

namespace {

// Mines token strings onto distinct feature-hash buckets so dense retrieval
// sees no accidental overlap between unrelated corpus tokens.
class BucketMiner {
public:
    BucketMiner(int dim, std::uint64_t seed) : dim_(dim), seed_(seed), used_(dim, 0) {}

    std::string fresh(const std::string& base) {
        for (int n = 0; n < 100000; ++n) {
            const std::string candidate = n == 0 ? base : base + "x" + std::to_string(n);
            const auto bucket = seeded_token_hash(candidate, seed_) % static_cast<std::uint64_t>(dim_);
            if (!used_[bucket]) {
                used_[bucket] = 1;
                return candidate;
            }
        }
        throw ConfigError("hash_dim " + std::to_string(dim_) +
                          " too crowded to mine a fresh bucket for \"" + base + "\"");
    }

    // Same signed bucket as `token`, different string.
    std::string twin(const std::string& token) const {
        const auto h = seeded_token_hash(token, seed_);
        const auto bucket = h % static_cast<std::uint64_t>(dim_);
        const bool negative = (h >> 63) != 0;
        for (int n = 0; n < 10000000; ++n) {
            const std::string candidate = token + "s" + std::to_string(n);
            const auto h2 = seeded_token_hash(candidate, seed_);
            if (h2 % static_cast<std::uint64_t>(dim_) == bucket && ((h2 >> 63) != 0) == negative) {
                return candidate;
            }
        }
        throw ConfigError("no hash twin found for \"" + token + "\"");
    }

private:
    int dim_;
    std::uint64_t seed_;
    std::vector<char> used_;
};

std::string capitalized(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

void validate_spec(const SyntheticSpec& spec) {
    if (spec.shapes.empty()) throw ConfigError("synthetic spec needs at least one vertical");
    std::set<std::string> ids;
    for (const auto& shape : spec.shapes) {
        if (shape.vertical_id.empty()) throw ConfigError("synthetic vertical id must be non-empty");
        if (!ids.insert(shape.vertical_id).second) {
            throw ConfigError("duplicate synthetic vertical id " + shape.vertical_id);
        }
        if (shape.branching.empty() || shape.branching.size() > 26) {
            throw ConfigError("vertical " + shape.vertical_id + " depth must be in [1, 26]");
        }
        for (int b : shape.branching) {
            if (b < 1 || b > 9) {
                throw ConfigError("vertical " + shape.vertical_id +
                                  " branching factors must be in [1, 9]");
            }
        }
    }
    if (spec.templates_per_intent < 1) throw ConfigError("templates_per_intent must be >= 1");
    if (spec.test_per_intent < 0) throw ConfigError("test_per_intent must be >= 0");
    if (!(spec.noise >= 0.0 && spec.noise < 1.0)) throw ConfigError("noise must be in [0, 1)");
    if (spec.hash_dim < 2) throw ConfigError("hash_dim must be >= 2");
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec) {
    validate_spec(spec);

    std::size_t leaves = 0;
    for (const auto& shape : spec.shapes) {
        std::size_t n = 1;
        for (int b : shape.branching) n *= static_cast<std::size_t>(b);
        leaves += n;
    }
    const std::size_t fillers_needed = static_cast<std::size_t>(spec.templates_per_intent) +
                                       2 * static_cast<std::size_t>(spec.test_per_intent);
    if (leaves + fillers_needed >= static_cast<std::size_t>(spec.hash_dim)) {
        throw ConfigError("hash_dim must exceed the corpus vocabulary (" +
                          std::to_string(leaves + fillers_needed) + " tokens)");
    }

    SyntheticCorpus corpus;
    BucketMiner miner(spec.hash_dim, spec.hash_seed);

    struct Leaf {
        IntentPath intent;
        std::string keyword;
        std::string area_token;
    };
    std::vector<Leaf> leaf_list;
    std::vector<std::string> area_tokens;

    for (std::size_t vi = 0; vi < spec.shapes.size(); ++vi) {
        const auto& shape = spec.shapes[vi];
        const std::string stem = "v" + std::to_string(vi);
        const std::size_t depth = shape.branching.size();

        Vertical vertical;
        vertical.id = shape.vertical_id;
        vertical.display_name = capitalized(shape.vertical_id);
        for (std::size_t level = 1; level <= depth; ++level) {
            vertical.level_names.push_back("Level" + std::to_string(level));
        }
        corpus.catalog.add_vertical(vertical);

        // Tokens are stem + level letter + 1-based child digits, so every
        // node across all verticals gets a distinct lowercase token.
        std::vector<int> path(depth, 0);
        std::vector<std::string> display(depth);
        const auto node_token = [&](std::size_t level) {
            std::string t = stem;
            t += static_cast<char>('a' + level);
            for (std::size_t l = 0; l <= level; ++l) t += static_cast<char>('1' + path[l]);
            return t;
        };
        const auto walk = [&](auto&& self, std::size_t level) -> void {
            for (path[level] = 0; path[level] < shape.branching[level]; ++path[level]) {
                std::string token = node_token(level);
                if (level + 1 == depth) {
                    token = miner.fresh(token);
                    display[level] = capitalized(token);
                    IntentPath intent{shape.vertical_id,
                                      std::vector<std::string>(display.begin(),
                                                               display.begin() + depth)};
                    corpus.catalog.add_intent(intent);
                    // A candidate's first rendered token is its level-one
                    // label, which for a depth-one vertical is the mined
                    // leaf itself.
                    leaf_list.push_back({std::move(intent), token,
                                         depth == 1 ? token : node_token(0)});
                    for (std::size_t l = 0; l + 1 < depth; ++l) {
                        corpus.scoring_table.set(node_token(l),
                                                 l + 2 == depth ? token : node_token(l + 1), 1.0);
                    }
                } else {
                    display[level] = capitalized(token);
                    self(self, level + 1);
                }
                if (level == 0) area_tokens.push_back(leaf_list.back().area_token);
            }
        };
        walk(walk, 0);
    }

    std::vector<std::string> index_fillers, test_fillers;
    for (int i = 0; i < spec.templates_per_intent; ++i) {
        index_fillers.push_back(miner.fresh("w" + std::to_string(i)));
    }
    for (int j = 0; j < 2 * spec.test_per_intent; ++j) {
        test_fillers.push_back(miner.fresh("q" + std::to_string(j)));
    }

    for (const auto& leaf : leaf_list) {
        corpus.keyword_vocab.push_back(leaf.keyword);
        for (const auto& area : area_tokens) {
            corpus.scoring_table.set(leaf.keyword, area, area == leaf.area_token ? 9.0 : 0.125);
        }
    }
    for (const auto& area : area_tokens) corpus.scoring_table.set("", area, 1.0);

    if (spec.paraphrase) {
        for (const auto& leaf : leaf_list) {
            const std::string twin = miner.twin(leaf.keyword);
            if (const auto* row = corpus.scoring_table.row(leaf.keyword)) {
                for (const auto& [next, weight] : *row) {
                    corpus.scoring_table.set(twin, next, weight);
                }
            }
            corpus.synonyms[leaf.keyword] = twin;
        }
    }

    for (const auto& leaf : leaf_list) {
        for (const auto& filler : index_fillers) {
            corpus.index_split.push_back({filler + " " + leaf.keyword, leaf.intent, "index"});
        }
    }

    Rng rng(spec.seed);
    for (const auto& leaf : leaf_list) {
        for (int j = 0; j < spec.test_per_intent; ++j) {
            std::vector<std::string> tokens = {test_fillers[2 * j], test_fillers[2 * j + 1],
                                               spec.paraphrase ? corpus.synonyms.at(leaf.keyword)
                                                               : leaf.keyword};
            for (auto& token : tokens) {
                if (rng.chance(spec.noise)) {
                    token = corpus.keyword_vocab[rng.below(corpus.keyword_vocab.size())];
                }
            }
            std::string query = tokens[0];
            for (std::size_t t = 1; t < tokens.size(); ++t) query += " " + tokens[t];
            corpus.test_split.push_back({std::move(query), leaf.intent, "test"});
        }
    }
    return corpus;
}

// --- benchmark runners ---------------------------------------------------

EvalReport run_eval(const Classifier& classifier, const std::vector<LabeledExample>& test) {
    std::vector<std::string> queries;
    std::vector<IntentPath> golds;
    queries.reserve(test.size());
    golds.reserve(test.size());
    for (const auto& ex : test) {
        queries.push_back(ex.query);
        golds.push_back(ex.gold);
    }

    const auto batch = classifier.classify_batch(queries);
    std::vector<IntentPath> preds;
    std::vector<double> retrieval_ms, scoring_ms;
    preds.reserve(batch.size());
    std::size_t fallbacks = 0, errors = 0;
    for (const auto& item : batch) {
        if (!item.prediction) {
            preds.push_back(IntentPath{});
            ++errors;
            continue;
        }
        preds.push_back(item.prediction->intent);
        retrieval_ms.push_back(item.prediction->retrieval_ms);
        scoring_ms.push_back(item.prediction->scoring_ms);
        if (item.prediction->fallback_used) ++fallbacks;
    }

    EvalReport report = compute_metrics(preds, golds);
    report.retrieval_latency = latency_stats(std::move(retrieval_ms));
    report.scoring_latency = latency_stats(std::move(scoring_ms));
    report.fallback_rate = test.empty() ? 0.0 : static_cast<double>(fallbacks) / test.size();
    report.error_rate = test.empty() ? 0.0 : static_cast<double>(errors) / test.size();
    report.config_summary = summarize(classifier.config());
    return report;
}

EvalReport run_baseline_nearest(const ExemplarIndex& index, EmbeddingProvider& embedder,
                                const PipelineConfig& config,
                                const std::vector<LabeledExample>& test) {
    using Clock = std::chrono::steady_clock;
    std::vector<IntentPath> preds, golds;
    std::vector<double> retrieval_ms;
    std::size_t errors = 0;
    for (const auto& ex : test) {
        golds.push_back(ex.gold);
        const auto t0 = Clock::now();
        try {
            const auto candidates = retrieve_candidates(index, embedder, config, ex.query, 1);
            preds.push_back(candidates.empty() ? IntentPath{}
                                               : candidates.entries.front().pair.intent);
            retrieval_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0)
                                       .count());
        } catch (const std::exception&) {
            preds.push_back(IntentPath{});
            ++errors;
        }
    }
    EvalReport report = compute_metrics(preds, golds);
    report.retrieval_latency = latency_stats(std::move(retrieval_ms));
    report.error_rate = test.empty() ? 0.0 : static_cast<double>(errors) / test.size();
    report.config_summary = summarize(config) + " baseline=nearest";
    return report;
}

std::vector<SweepRow> run_topk_sweep(const Classifier& classifier,
                                     const std::vector<std::size_t>& ks,
                                     const std::vector<LabeledExample>& test) {
    if (ks.empty()) throw ValidationError("top-k sweep needs at least one k");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] < 1) throw ValidationError("top-k sweep: k must be >= 1");
        if (i > 0 && ks[i] <= ks[i - 1]) {
            throw ValidationError("top-k sweep: ks must be strictly ascending");
        }
    }

    std::vector<std::string> queries;
    queries.reserve(test.size());
    for (const auto& ex : test) queries.push_back(ex.query);

    std::vector<SweepRow> rows;
    for (std::size_t k : ks) {
        ClassifyOverrides over;
        over.top_k = k;
        const auto batch = classifier.classify_batch(queries, over);
        SweepRow row;
        row.k = k;
        std::vector<double> retrieval_ms, scoring_ms;
        std::size_t correct = 0, covered = 0, candidates = 0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto& item = batch[i];
            if (!item.prediction) continue;
            const auto& pred = *item.prediction;
            if (pred.intent == test[i].gold) ++correct;
            for (const auto& [intent, prob] : pred.candidates_considered) {
                if (intent == test[i].gold) {
                    ++covered;
                    break;
                }
            }
            candidates += pred.candidates_considered.size();
            retrieval_ms.push_back(pred.retrieval_ms);
            scoring_ms.push_back(pred.scoring_ms);
        }
        const auto total = static_cast<double>(test.size());
        row.accuracy = test.empty() ? 0.0 : correct / total;
        row.gold_coverage = test.empty() ? 0.0 : covered / total;
        row.mean_candidates = test.empty() ? 0.0 : static_cast<double>(candidates) / total;
        row.retrieval_latency = latency_stats(std::move(retrieval_ms));
        row.scoring_latency = latency_stats(std::move(scoring_ms));
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "k,accuracy,gold_coverage,mean_candidates,retrieval_p50_ms,retrieval_p95_ms,"
           "scoring_p50_ms,scoring_p95_ms\n";
    for (const auto& row : rows) {
        out << row.k << ',' << row.accuracy << ',' << row.gold_coverage << ','
            << row.mean_candidates << ',' << row.retrieval_latency.p50_ms << ','
            << row.retrieval_latency.p95_ms << ',' << row.scoring_latency.p50_ms << ','
            << row.scoring_latency.p95_ms << '\n';
    }
    return out.str();
}

std::string sweep_to_json(const std::vector<SweepRow>& rows) {
    json doc = json::array();
    for (const auto& row : rows) {
        doc.push_back(json{{"k", row.k},
                           {"accuracy", row.accuracy},
                           {"gold_coverage", row.gold_coverage},
                           {"mean_candidates", row.mean_candidates},
                           {"retrieval_ms", latency_to_json(row.retrieval_latency)},
                           {"scoring_ms", latency_to_json(row.scoring_latency)}});
    }
    return doc.dump(2);
}

OodReport run_ood_eval(const Classifier& classifier, const std::vector<LabeledExample>& in_test,
                       const std::vector<LabeledExample>& ood_test) {
    OodReport result;
    result.in_domain = run_eval(classifier, in_test);
    result.out_of_domain = run_eval(classifier, ood_test);

    const auto snapshot = classifier.index_snapshot();
    std::set<IntentPath> indexed;
    for (const auto& pair : snapshot->pairs()) indexed.insert(pair.intent);
    const auto coverage = [&](const std::vector<LabeledExample>& test) {
        if (test.empty()) return 0.0;
        std::size_t hit = 0;
        for (const auto& ex : test) hit += indexed.count(ex.gold);
        return static_cast<double>(hit) / static_cast<double>(test.size());
    };
    result.in_domain_coverage = coverage(in_test);
    result.out_of_domain_coverage = coverage(ood_test);
    return result;
}

DelayLogitProvider::DelayLogitProvider(std::shared_ptr<LogitProvider> inner, int delay_us)
    : inner_(std::move(inner)), delay_us_(delay_us) {
    if (!inner_) throw ConfigError("DelayLogitProvider needs an inner provider");
    if (delay_us_ < 0) throw ConfigError("DelayLogitProvider delay must be >= 0");
}

std::vector<double> DelayLogitProvider::token_logprobs(const std::string& prompt,
                                                       const std::string& continuation) {
    std::this_thread::sleep_for(std::chrono::microseconds(delay_us_));
    return inner_->token_logprobs(prompt, continuation);
}

}  // namespace icr
