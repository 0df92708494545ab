// Command-line front end: corpus generation, index builds, one-off
// classification, evaluation, top-k sweeps, and the HTTP service.
//
// Exit codes, also listed in --help:
//   0 success          1 data validation   2 configuration/usage
//   4 index file       5 provider backend  6 no candidates
//   9 unexpected error

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "icr/common.hpp"
#include "icr/embedding.hpp"
#include "icr/eval.hpp"
#include "icr/index_io.hpp"
#include "icr/pipeline.hpp"
#include "icr/retrieval.hpp"
#include "icr/scoring.hpp"
#include "icr/service.hpp"
#include "icr/taxonomy.hpp"

#include <CLI11.hpp>
#include <json.hpp>

using nlohmann::json;

namespace {

volatile std::sig_atomic_t g_stop_requested = 0;

void request_stop(int) { g_stop_requested = 1; }

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.flush();
    if (!out) throw icr::ConfigError("cannot write " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw icr::ConfigError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// --- shared pipeline wiring ----------------------------------------------

// Flags shared by every subcommand that runs the pipeline against an index.
struct RuntimeArgs {
    std::string index_path;
    std::string catalog_path;
    std::string retriever = "dense";
    std::size_t top_k = 10;
    std::string vertical;
    std::string provider = "mock";  // logit provider
    std::string table_path;         // mock provider's bigram table
    std::string score_endpoint;
    std::string score_model;
    std::string embed_endpoint;  // empty: hash embedder from the index fingerprint
    std::string embed_model;
    int dim = 0;  // 0: derive from the index fingerprint
    std::uint64_t hash_seed = 42;
    bool hash_seed_given = false;
    std::size_t parallelism = 4;
};

void add_runtime_options(CLI::App* sub, RuntimeArgs& args, bool needs_scorer) {
    sub->add_option("--index", args.index_path, "Index file built by build-index")->required();
    sub->add_option("--catalog", args.catalog_path, "Intent catalog JSON")->required();
    sub->add_option("--retriever", args.retriever, "Retrieval backend")
        ->check(CLI::IsMember({"bm25", "dense", "maxsim"}))
        ->capture_default_str();
    sub->add_option("--top-k", args.top_k, "Exemplars retrieved per query")
        ->capture_default_str();
    sub->add_option("--vertical", args.vertical, "Restrict retrieval to one vertical");
    sub->add_option("--dim", args.dim,
                    "Embedding dimension (default: derived from the index fingerprint)");
    sub->add_option("--hash-seed", args.hash_seed, "Feature-hashing seed")
        ->capture_default_str();
    sub->add_option("--embed-endpoint", args.embed_endpoint,
                    "Remote embedding endpoint (default: local feature hashing)");
    sub->add_option("--embed-model", args.embed_model, "Remote embedding model name");
    if (needs_scorer) {
        sub->add_option("--provider", args.provider, "Scoring provider")
            ->check(CLI::IsMember({"mock", "remote"}))
            ->capture_default_str();
        sub->add_option("--table", args.table_path, "Bigram table JSON for the mock provider");
        sub->add_option("--score-endpoint", args.score_endpoint,
                        "Remote log-probability endpoint");
        sub->add_option("--score-model", args.score_model, "Remote scoring model name");
        sub->add_option("--parallelism", args.parallelism, "Batch classification threads")
            ->capture_default_str();
    }
}

// Pipeline components assembled from flags plus the loaded index.
struct Runtime {
    icr::IntentCatalog catalog;
    std::shared_ptr<const icr::ExemplarIndex> index;
    std::shared_ptr<icr::EmbeddingProvider> embedder;
    std::shared_ptr<icr::LogitProvider> scorer;
    icr::PipelineConfig config;

    std::shared_ptr<icr::Classifier> classifier() const {
        return std::make_shared<icr::Classifier>(config, index, embedder, scorer, catalog);
    }
};

std::shared_ptr<icr::EmbeddingProvider> make_embedder(const RuntimeArgs& args,
                                                      const std::string& index_fingerprint) {
    icr::EmbeddingProviderSpec spec;
    if (!args.embed_endpoint.empty()) {
        spec.kind = icr::EmbeddingProviderSpec::Kind::remote;
        spec.endpoint = args.embed_endpoint;
        spec.model = args.embed_model;
        if (args.dim <= 0) throw icr::ConfigError("--embed-endpoint requires --dim");
        spec.dim = args.dim;
        return icr::make_embedding_provider(spec);
    }
    spec.kind = icr::EmbeddingProviderSpec::Kind::hash;
    int dim = args.dim;
    std::uint64_t seed = args.hash_seed;
    if (dim <= 0 && !index_fingerprint.empty()) {
        // Adopt the hash parameters the index was built with; a mismatch
        // would only surface later as a fingerprint IndexError.
        unsigned long long parsed_seed = 0;
        if (std::sscanf(index_fingerprint.c_str(), "hash/dim=%d/seed=%llu", &dim,
                        &parsed_seed) != 2) {
            throw icr::ConfigError("index was not built with the hash embedder (" +
                                   index_fingerprint + "); pass --embed-endpoint and --dim");
        }
        if (!args.hash_seed_given) seed = parsed_seed;
    }
    if (dim <= 0) throw icr::ConfigError("embedding dimension unknown; pass --dim");
    spec.dim = dim;
    spec.seed = seed;
    return icr::make_embedding_provider(spec);
}

std::shared_ptr<icr::LogitProvider> make_scorer(const RuntimeArgs& args) {
    icr::LogitProviderSpec spec;
    if (args.provider == "remote") {
        spec.kind = icr::LogitProviderSpec::Kind::remote;
        if (args.score_endpoint.empty()) {
            throw icr::ConfigError("--provider remote requires --score-endpoint");
        }
        spec.endpoint = args.score_endpoint;
        spec.model = args.score_model;
    } else {
        spec.kind = icr::LogitProviderSpec::Kind::mock;
        if (args.table_path.empty()) {
            throw icr::ConfigError("--provider mock requires --table");
        }
        spec.table_path = args.table_path;
    }
    return icr::make_logit_provider(spec);
}

Runtime build_runtime(const RuntimeArgs& args, bool needs_scorer) {
    Runtime rt;
    rt.catalog = icr::load_catalog(args.catalog_path);
    rt.index = std::make_shared<const icr::ExemplarIndex>(icr::load_index(args.index_path));
    rt.embedder = make_embedder(args, rt.index->fingerprint());
    if (needs_scorer) rt.scorer = make_scorer(args);
    rt.config.top_k = args.top_k;
    rt.config.retriever = icr::retriever_kind_from_string(args.retriever);
    if (!args.vertical.empty()) rt.config.vertical = args.vertical;
    rt.config.batch_parallelism = args.parallelism;
    return rt;
}

// --- gen-corpus ------------------------------------------------------------

struct GenCorpusArgs {
    std::string out_dir;
    std::vector<std::string> shapes;  // "vertical:3,3,2"
    int templates = 3;
    int test_per_intent = 2;
    double noise = 0.0;
    bool paraphrase = false;
    int dim = 2048;
    std::uint64_t hash_seed = 42;
    std::uint64_t seed = 42;
    bool json_out = false;
};

icr::SyntheticSpec::Shape parse_shape(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos || colon == 0) {
        throw icr::ConfigError("--shape expects vertical:b1,b2,... got \"" + text + "\"");
    }
    icr::SyntheticSpec::Shape shape;
    shape.vertical_id = text.substr(0, colon);
    std::istringstream levels(text.substr(colon + 1));
    std::string part;
    while (std::getline(levels, part, ',')) {
        try {
            shape.branching.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw icr::ConfigError("bad branching factor \"" + part + "\" in --shape " + text);
        }
    }
    if (shape.branching.empty()) {
        throw icr::ConfigError("--shape " + text + " lists no branching factors");
    }
    return shape;
}

void run_gen_corpus(const GenCorpusArgs& args) {
    icr::SyntheticSpec spec;
    if (!args.shapes.empty()) {
        spec.shapes.clear();
        for (const auto& text : args.shapes) spec.shapes.push_back(parse_shape(text));
    }
    spec.templates_per_intent = args.templates;
    spec.test_per_intent = args.test_per_intent;
    spec.noise = args.noise;
    spec.paraphrase = args.paraphrase;
    spec.hash_dim = args.dim;
    spec.hash_seed = args.hash_seed;
    spec.seed = args.seed;

    const auto corpus = icr::generate_synthetic_corpus(spec);
    std::filesystem::create_directories(args.out_dir);
    const auto path = [&](const char* name) {
        return (std::filesystem::path(args.out_dir) / name).string();
    };
    icr::save_catalog(corpus.catalog, path("catalog.json"));
    icr::write_corpus_jsonl(icr::to_exemplar_pairs(corpus.index_split), path("index.jsonl"));
    write_text_file(path("test.jsonl"), icr::examples_to_jsonl(corpus.test_split));
    write_text_file(path("table.json"), corpus.scoring_table.to_json());

    json summary{{"out", args.out_dir},
                 {"intents", corpus.catalog.intents().size()},
                 {"index_examples", corpus.index_split.size()},
                 {"test_examples", corpus.test_split.size()},
                 {"hash_dim", spec.hash_dim},
                 {"hash_seed", spec.hash_seed},
                 {"files", json{{"catalog", path("catalog.json")},
                                {"corpus", path("index.jsonl")},
                                {"test", path("test.jsonl")},
                                {"table", path("table.json")}}}};
    if (args.json_out) {
        std::cout << summary.dump() << "\n";
    } else {
        std::cout << "wrote " << corpus.index_split.size() << " index and "
                  << corpus.test_split.size() << " test examples for "
                  << corpus.catalog.intents().size() << " intents to " << args.out_dir << "\n"
                  << "build with: icr build-index --corpus " << path("index.jsonl")
                  << " --catalog " << path("catalog.json") << " --dim " << spec.hash_dim
                  << " --hash-seed " << spec.hash_seed << " --out <index>\n";
    }
}

// --- build-index -----------------------------------------------------------

struct BuildIndexArgs {
    std::string corpus_path;
    std::string catalog_path;
    std::string out_path;
    int dim = 256;
    std::uint64_t hash_seed = 42;
    std::string embed_endpoint;
    std::string embed_model;
    bool token_vectors = false;
    bool json_out = false;
};

void run_build_index(const BuildIndexArgs& args) {
    const auto catalog = icr::load_catalog(args.catalog_path);
    const auto pairs = icr::read_corpus_jsonl(args.corpus_path, catalog);

    RuntimeArgs embed_args;
    embed_args.dim = args.dim;
    embed_args.hash_seed = args.hash_seed;
    embed_args.hash_seed_given = true;
    embed_args.embed_endpoint = args.embed_endpoint;
    embed_args.embed_model = args.embed_model;
    const auto embedder = make_embedder(embed_args, "");

    const auto index = icr::build_index(pairs, *embedder, catalog, args.token_vectors);
    icr::save_index(index, args.out_path);

    std::map<std::string, std::size_t> per_vertical;
    for (const auto& pair : index.pairs()) ++per_vertical[pair.intent.vertical_id];

    if (args.json_out) {
        std::cout << json{{"pairs", index.size()},
                          {"per_vertical", per_vertical},
                          {"fingerprint", index.fingerprint()},
                          {"path", args.out_path}}
                         .dump()
                  << "\n";
    } else {
        std::cout << "indexed " << index.size() << " pairs -> " << args.out_path << " ("
                  << index.fingerprint() << ")\n";
        for (const auto& [vertical, count] : per_vertical) {
            std::cout << "  " << std::left << std::setw(16) << vertical << count << "\n";
        }
    }
}

// --- classify ----------------------------------------------------------------

struct ClassifyArgs {
    RuntimeArgs runtime;
    std::string query;
    bool json_out = false;
};

void run_classify(const ClassifyArgs& args) {
    const auto rt = build_runtime(args.runtime, true);
    const auto classifier = rt.classifier();
    const auto prediction = classifier->classify(args.query);
    // Compact single line in --json mode, indented otherwise; both parse.
    std::cout << icr::prediction_to_json(prediction, !args.json_out) << "\n";
}

// --- eval ---------------------------------------------------------------------

struct EvalArgs {
    RuntimeArgs runtime;
    std::string test_path;
    std::string out_json;
    std::string out_csv;
    bool baseline = false;
    bool json_out = false;
};

std::vector<icr::LabeledExample> load_examples(const std::string& path) {
    auto examples = icr::examples_from_jsonl(read_text_file(path));
    if (examples.empty()) throw icr::ValidationError("no examples in " + path);
    return examples;
}

void print_eval_summary(const icr::EvalReport& report) {
    std::cout << std::fixed << std::setprecision(4);
    std::cout << "accuracy        " << report.accuracy << "  (" << report.total << " examples)\n"
              << "micro P/R/F1    " << report.micro.precision << " / " << report.micro.recall
              << " / " << report.micro.f1 << "\n"
              << "macro P/R/F1    " << report.macro.precision << " / " << report.macro.recall
              << " / " << report.macro.f1 << "\n"
              << "fallback rate   " << report.fallback_rate << "\n"
              << "error rate      " << report.error_rate << "\n"
              << "latency p50 ms  retrieval " << report.retrieval_latency.p50_ms << ", scoring "
              << report.scoring_latency.p50_ms << "\n"
              << "config          " << report.config_summary << "\n";
    for (const auto& [vertical, vm] : report.per_vertical) {
        std::cout << "  " << std::left << std::setw(16) << vertical << std::right << " acc "
                  << vm.accuracy << "  macro F1 " << vm.macro.f1 << "  n=" << vm.support << "\n";
    }
    std::cout.unsetf(std::ios::fixed);
}

void run_eval_cmd(const EvalArgs& args) {
    const auto rt = build_runtime(args.runtime, true);
    const auto classifier = rt.classifier();
    const auto test = load_examples(args.test_path);

    auto report = icr::run_eval(*classifier, test);
    json doc = json::parse(report.to_json());
    if (args.baseline) {
        const auto base = icr::run_baseline_nearest(*rt.index, *rt.embedder, rt.config, test);
        doc["baseline_accuracy"] = base.accuracy;
        doc["rerank_gain"] = report.accuracy - base.accuracy;
    }
    if (!args.out_json.empty()) write_text_file(args.out_json, doc.dump(2) + "\n");
    if (!args.out_csv.empty()) write_text_file(args.out_csv, report.to_csv());

    if (args.json_out) {
        std::cout << doc.dump() << "\n";
    } else {
        print_eval_summary(report);
        if (args.baseline) {
            std::cout << std::fixed << std::setprecision(4) << "baseline acc    "
                      << doc["baseline_accuracy"].get<double>() << "  (rerank gain "
                      << doc["rerank_gain"].get<double>() << ")\n";
            std::cout.unsetf(std::ios::fixed);
        }
    }
}

// --- sweep ----------------------------------------------------------------------

struct SweepArgs {
    RuntimeArgs runtime;
    std::string test_path;
    std::vector<std::size_t> ks = {1, 2, 5, 10, 20, 50};
    int delay_us = 0;
    std::string out_json;
    std::string out_csv;
    bool json_out = false;
};

void run_sweep_cmd(const SweepArgs& args) {
    auto rt = build_runtime(args.runtime, true);
    if (args.delay_us > 0) {
        // Constant per-call cost makes the latency series reflect candidate
        // counts instead of table-lookup noise.
        rt.scorer = std::make_shared<icr::DelayLogitProvider>(rt.scorer, args.delay_us);
    }
    const auto classifier = rt.classifier();
    const auto test = load_examples(args.test_path);

    const auto rows = icr::run_topk_sweep(*classifier, args.ks, test);
    if (!args.out_json.empty()) write_text_file(args.out_json, icr::sweep_to_json(rows) + "\n");
    if (!args.out_csv.empty()) write_text_file(args.out_csv, icr::sweep_to_csv(rows));

    if (args.json_out) {
        std::cout << json::parse(icr::sweep_to_json(rows)).dump() << "\n";
    } else {
        std::cout << "    k  accuracy  coverage  candidates  scoring p50 ms\n"
                  << std::fixed << std::setprecision(4);
        for (const auto& row : rows) {
            std::cout << std::setw(5) << row.k << "  " << std::setw(8) << row.accuracy << "  "
                      << std::setw(8) << row.gold_coverage << "  " << std::setw(10)
                      << row.mean_candidates << "  " << std::setw(14)
                      << row.scoring_latency.p50_ms << "\n";
        }
        std::cout.unsetf(std::ios::fixed);
    }
}

// --- serve -----------------------------------------------------------------------

struct ServeArgs {
    RuntimeArgs runtime;
    std::string host = "127.0.0.1";
    int port = 0;
    int max_concurrency = 8;
    int timeout_ms = 30000;
    std::string auth_env = "ICR_SERVICE_TOKEN";
    std::string wal_path;
    std::string snapshot_path;
    bool json_out = false;
};

void run_serve(const ServeArgs& args) {
    const auto rt = build_runtime(args.runtime, true);

    icr::ServiceConfig config;
    config.host = args.host;
    config.port = args.port;
    config.pipeline = rt.config;
    config.max_concurrency = args.max_concurrency;
    config.request_timeout_ms = args.timeout_ms;
    config.auth_token_env = args.auth_env;
    config.wal_path = args.wal_path;
    config.index_path = args.snapshot_path;

    icr::ClassificationService service(config, rt.classifier(), rt.embedder);
    const int port = service.start();

    if (args.json_out) {
        std::cout << json{{"port", port},
                          {"host", args.host},
                          {"index_size", service.classifier().index_snapshot()->size()},
                          {"index_fingerprint", rt.index->fingerprint()}}
                         .dump()
                  << std::endl;
    } else {
        std::cout << "serving on " << args.host << ":" << port << " ("
                  << service.classifier().index_snapshot()->size() << " exemplars)" << std::endl;
    }

    std::signal(SIGINT, request_stop);
    std::signal(SIGTERM, request_stop);
    while (!g_stop_requested) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    service.stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Exemplar-retrieval intent classification.\n"
        "Exit codes: 0 ok, 1 data validation, 2 configuration/usage, 4 index file,\n"
        "5 provider backend, 6 no candidates, 9 unexpected."};
    app.require_subcommand(1);
    // Values under a [subcommand] section fill any flag not given on the
    // command line; explicit flags always win.
    app.set_config("--config", "", "TOML config file with [subcommand] sections");

    GenCorpusArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-corpus", "Generate a synthetic labeled corpus");
    gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();
    gen_cmd->add_option("--shape", gen.shapes,
                        "Vertical shape as id:b1,b2,... (repeatable; default retail+digital)");
    gen_cmd->add_option("--templates", gen.templates, "Index exemplars per intent")
        ->capture_default_str();
    gen_cmd->add_option("--test-per-intent", gen.test_per_intent, "Test queries per intent")
        ->capture_default_str();
    gen_cmd->add_option("--noise", gen.noise, "Token corruption rate in [0,1)")
        ->capture_default_str();
    gen_cmd->add_flag("--paraphrase", gen.paraphrase,
                      "Swap test keywords for surface-disjoint synonyms");
    gen_cmd->add_option("--dim", gen.dim, "Feature-hashing dimension")->capture_default_str();
    gen_cmd->add_option("--hash-seed", gen.hash_seed, "Feature-hashing seed")
        ->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "Corpus RNG seed")->capture_default_str();
    gen_cmd->add_flag("--json", gen.json_out, "Machine-readable stdout");
    gen_cmd->fallthrough();
    gen_cmd->callback([&] { run_gen_corpus(gen); });

    BuildIndexArgs build;
    auto* build_cmd = app.add_subcommand("build-index", "Embed a corpus into an index file");
    build_cmd->add_option("--corpus", build.corpus_path, "Corpus JSONL")->required();
    build_cmd->add_option("--catalog", build.catalog_path, "Intent catalog JSON")->required();
    build_cmd->add_option("--out", build.out_path, "Index file to write")->required();
    build_cmd->add_option("--dim", build.dim, "Embedding dimension")->capture_default_str();
    build_cmd->add_option("--hash-seed", build.hash_seed, "Feature-hashing seed")
        ->capture_default_str();
    build_cmd->add_option("--embed-endpoint", build.embed_endpoint,
                          "Remote embedding endpoint (default: local feature hashing)");
    build_cmd->add_option("--embed-model", build.embed_model, "Remote embedding model name");
    build_cmd->add_flag("--token-vectors", build.token_vectors,
                        "Store per-token vectors (required by the maxsim retriever)");
    build_cmd->add_flag("--json", build.json_out, "Machine-readable stdout");
    build_cmd->fallthrough();
    build_cmd->callback([&] { run_build_index(build); });

    ClassifyArgs classify;
    auto* classify_cmd = app.add_subcommand("classify", "Classify one query");
    classify_cmd->add_option("query", classify.query, "Query text")->required();
    add_runtime_options(classify_cmd, classify.runtime, true);
    classify_cmd->add_flag("--json", classify.json_out, "Compact single-line JSON");
    classify_cmd->fallthrough();
    classify_cmd->callback([&] {
        classify.runtime.hash_seed_given = classify_cmd->count("--hash-seed") > 0;
        run_classify(classify);
    });

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate against a labeled test file");
    eval_cmd->add_option("--test", eval.test_path, "Labeled examples JSONL")->required();
    add_runtime_options(eval_cmd, eval.runtime, true);
    eval_cmd->add_option("--out-json", eval.out_json, "Write the full report here");
    eval_cmd->add_option("--out-csv", eval.out_csv, "Write the per-class grid here");
    eval_cmd->add_flag("--baseline", eval.baseline,
                       "Also score the retrieval-only nearest-exemplar baseline");
    eval_cmd->add_flag("--json", eval.json_out, "Machine-readable stdout");
    eval_cmd->fallthrough();
    eval_cmd->callback([&] {
        eval.runtime.hash_seed_given = eval_cmd->count("--hash-seed") > 0;
        run_eval_cmd(eval);
    });

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep top-k and report the tradeoff curve");
    sweep_cmd->add_option("--test", sweep.test_path, "Labeled examples JSONL")->required();
    add_runtime_options(sweep_cmd, sweep.runtime, true);
    sweep_cmd->add_option("--ks", sweep.ks, "Ascending k values")
        ->delimiter(',')
        ->capture_default_str();
    sweep_cmd->add_option("--delay-us", sweep.delay_us,
                          "Fixed per-call scoring delay, for latency curves")
        ->capture_default_str();
    sweep_cmd->add_option("--out-json", sweep.out_json, "Write the JSON series here");
    sweep_cmd->add_option("--out-csv", sweep.out_csv, "Write the CSV series here");
    sweep_cmd->add_flag("--json", sweep.json_out, "Machine-readable stdout");
    sweep_cmd->fallthrough();
    sweep_cmd->callback([&] {
        sweep.runtime.hash_seed_given = sweep_cmd->count("--hash-seed") > 0;
        run_sweep_cmd(sweep);
    });

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP classification service");
    add_runtime_options(serve_cmd, serve.runtime, true);
    serve_cmd->add_option("--host", serve.host, "Listen address")->capture_default_str();
    serve_cmd->add_option("--port", serve.port, "Listen port (0 picks an ephemeral port)")
        ->capture_default_str();
    serve_cmd->add_option("--max-concurrency", serve.max_concurrency, "Request worker threads")
        ->capture_default_str();
    serve_cmd->add_option("--timeout-ms", serve.timeout_ms, "Request read/write timeout")
        ->capture_default_str();
    serve_cmd->add_option("--auth-env", serve.auth_env,
                          "Env var holding the bearer token (unset/empty runs open)")
        ->capture_default_str();
    serve_cmd->add_option("--wal", serve.wal_path,
                          "Write-ahead exemplar log, replayed on startup");
    serve_cmd->add_option("--snapshot-path", serve.snapshot_path,
                          "Index file written by POST /index/snapshot");
    serve_cmd->add_flag("--json", serve.json_out, "Machine-readable startup line");
    serve_cmd->fallthrough();
    serve_cmd->callback([&] {
        serve.runtime.hash_seed_given = serve_cmd->count("--hash-seed") > 0;
        run_serve(serve);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const icr::ConfigError& e) {
        std::cerr << "icr: " << e.what() << "\n";
        return 2;
    } catch (const icr::ValidationError& e) {
        std::cerr << "icr: " << e.what() << "\n";
        return 1;
    } catch (const icr::IndexError& e) {
        std::cerr << "icr: " << e.what() << "\n";
        return 4;
    } catch (const icr::ProviderError& e) {
        std::cerr << "icr: " << e.what() << "\n";
        return 5;
    } catch (const icr::NoCandidatesError& e) {
        std::cerr << "icr: " << e.what() << "\n";
        return 6;
    } catch (const std::exception& e) {
        std::cerr << "icr: " << e.what() << "\n";
        return 9;
    }
    return 0;
}
