#include "icr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "icr/textproc.hpp"

namespace icr {
namespace {

void check_fingerprint(const ExemplarIndex& index, const RetrievalOptions& opts) {
    if (!opts.expect_fingerprint.empty() && opts.expect_fingerprint != index.fingerprint()) {
        throw IndexError("encoder fingerprint mismatch: index built with \"" +
                         index.fingerprint() + "\", query uses \"" + opts.expect_fingerprint +
                         "\"");
    }
}

bool pair_allowed(const ExemplarPair& pair, const RetrievalOptions& opts) {
    return !opts.vertical || pair.intent.vertical_id == *opts.vertical;
}

}  // namespace

Matf embed_tokens(const std::string& query, EmbeddingProvider& provider) {
    const auto tokens = tokenize(query).tokens;
    Matf out(static_cast<Eigen::Index>(tokens.size()), provider.dim());
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        out.row(static_cast<Eigen::Index>(t)) = unit_normalized(provider.embed(tokens[t])).transpose();
    }
    return out;
}

void validate_pair(const ExemplarPair& pair, const IntentCatalog& catalog) {
    const std::string who = "pair " + std::to_string(pair.id);
    const Vertical* v = catalog.find_vertical(pair.intent.vertical_id);
    if (!v) {
        throw ValidationError(who + ": unknown vertical \"" + pair.intent.vertical_id + "\"");
    }
    if (pair.intent.labels.empty()) throw ValidationError(who + ": intent has no labels");
    if (pair.intent.labels.size() > v->level_names.size()) {
        throw ValidationError(who + ": intent depth " + std::to_string(pair.intent.labels.size()) +
                              " exceeds vertical's " + std::to_string(v->level_names.size()) +
                              " levels");
    }
    for (const auto& label : pair.intent.labels) {
        if (label.empty() || label.find('>') != std::string::npos) {
            throw ValidationError(who + ": bad intent label \"" + label + "\"");
        }
    }
    if (normalize(pair.query).empty()) {
        throw ValidationError(who + ": query is empty after normalization");
    }
}

CandidateSet CandidateSet::from_scored(std::vector<Entry> scored, std::size_t k_requested) {
    std::sort(scored.begin(), scored.end(), [](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.pair.id < b.pair.id;
    });
    if (scored.size() > k_requested) scored.resize(k_requested);
    CandidateSet out;
    out.entries = std::move(scored);
    out.k_requested = k_requested;
    for (const auto& e : out.entries) {
        if (std::find(out.unique_intents.begin(), out.unique_intents.end(), e.pair.intent) ==
            out.unique_intents.end()) {
            out.unique_intents.push_back(e.pair.intent);
        }
    }
    return out;
}

ExemplarIndex::ExemplarIndex(std::string fingerprint, int dim, bool token_vectors)
    : fingerprint_(std::move(fingerprint)), dim_(dim), token_vectors_(token_vectors) {
    if (dim <= 0) throw ConfigError("index dim must be positive");
    rows_.resize(0, dim);
}

void ExemplarIndex::rebuild_sparse() {
    sparse_ = SparseStats{};
    sparse_.doc_lens.reserve(pairs_.size());
    std::int64_t total = 0;
    for (std::size_t pos = 0; pos < pairs_.size(); ++pos) {
        const auto tokens = tokenize(pairs_[pos].query).tokens;
        sparse_.doc_lens.push_back(static_cast<std::int32_t>(tokens.size()));
        total += static_cast<std::int64_t>(tokens.size());
        std::map<std::string, std::int32_t> counts;
        for (const auto& t : tokens) ++counts[t];
        for (const auto& [term, tf] : counts) {
            sparse_.postings[term].emplace_back(static_cast<std::int32_t>(pos), tf);
        }
    }
    if (!pairs_.empty()) {
        sparse_.avgdl = static_cast<double>(total) / static_cast<double>(pairs_.size());
    }
}

void ExemplarIndex::upsert(const ExemplarPair& pair, EmbeddingProvider& provider,
                           const IntentCatalog& catalog) {
    validate_pair(pair, catalog);
    if (provider.fingerprint() != fingerprint_) {
        throw IndexError("encoder fingerprint mismatch: index built with \"" + fingerprint_ +
                         "\", upsert uses \"" + provider.fingerprint() + "\"");
    }
    const Vecf row = unit_normalized(provider.embed(pair.query));
    Matf tok_rows;
    if (token_vectors_) tok_rows = embed_tokens(pair.query, provider);

    auto it = std::lower_bound(pairs_.begin(), pairs_.end(), pair.id,
                               [](const ExemplarPair& p, std::int64_t id) { return p.id < id; });
    const auto pos = static_cast<Eigen::Index>(it - pairs_.begin());
    if (it != pairs_.end() && it->id == pair.id) {
        *it = pair;
        rows_.row(pos) = row.transpose();
        if (token_vectors_) token_rows_[static_cast<std::size_t>(pos)] = std::move(tok_rows);
    } else {
        pairs_.insert(it, pair);
        rows_.conservativeResize(rows_.rows() + 1, Eigen::NoChange);
        for (Eigen::Index i = rows_.rows() - 1; i > pos; --i) rows_.row(i) = rows_.row(i - 1);
        rows_.row(pos) = row.transpose();
        if (token_vectors_) {
            token_rows_.insert(token_rows_.begin() + pos, std::move(tok_rows));
        }
    }
    rebuild_sparse();
}

ExemplarIndex ExemplarIndex::from_parts(std::string fingerprint, int dim, bool token_vectors,
                                        std::vector<ExemplarPair> pairs, Matf rows,
                                        std::vector<Matf> token_rows) {
    ExemplarIndex index(std::move(fingerprint), dim, token_vectors);
    if (rows.rows() != static_cast<Eigen::Index>(pairs.size()) ||
        (pairs.size() > 0 && rows.cols() != dim)) {
        throw IndexError("row matrix shape does not match pair count/dim");
    }
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        if (pairs[i - 1].id >= pairs[i].id) throw IndexError("pair ids must be strictly increasing");
    }
    if (token_vectors && token_rows.size() != pairs.size()) {
        throw IndexError("token vector count does not match pair count");
    }
    index.pairs_ = std::move(pairs);
    index.rows_ = std::move(rows);
    index.token_rows_ = std::move(token_rows);
    index.rebuild_sparse();
    return index;
}

ExemplarIndex build_index(std::vector<ExemplarPair> pairs, EmbeddingProvider& provider,
                          const IntentCatalog& catalog, bool token_vectors) {
    std::string failures;
    for (const auto& p : pairs) {
        try {
            validate_pair(p, catalog);
        } catch (const ValidationError& e) {
            failures += failures.empty() ? e.what() : std::string("; ") + e.what();
        }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const ExemplarPair& a, const ExemplarPair& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        if (pairs[i - 1].id == pairs[i].id) {
            failures += (failures.empty() ? "" : "; ");
            failures += "duplicate pair id " + std::to_string(pairs[i].id);
        }
    }
    if (!failures.empty()) throw ValidationError("invalid exemplar pairs: " + failures);

    std::vector<std::string> queries;
    queries.reserve(pairs.size());
    for (const auto& p : pairs) queries.push_back(p.query);
    Matf rows = provider.embed_batch(queries);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        rows.row(i) = unit_normalized(rows.row(i).transpose()).transpose();
    }
    std::vector<Matf> token_rows;
    if (token_vectors) {
        token_rows.reserve(pairs.size());
        for (const auto& p : pairs) token_rows.push_back(embed_tokens(p.query, provider));
    }
    if (pairs.empty()) rows.resize(0, provider.dim());
    return ExemplarIndex::from_parts(provider.fingerprint(), provider.dim(), token_vectors,
                                     std::move(pairs), std::move(rows), std::move(token_rows));
}

CandidateSet dense_topk(const ExemplarIndex& index, const Vecf& query_vec, std::size_t k,
                        const RetrievalOptions& opts) {
    if (k == 0) throw ValidationError("dense_topk: k must be >= 1");
    check_fingerprint(index, opts);
    if (index.size() == 0) return CandidateSet::from_scored({}, k);
    if (query_vec.size() != index.dim()) {
        throw ValidationError("dense_topk: query dim " + std::to_string(query_vec.size()) +
                              " does not match index dim " + std::to_string(index.dim()));
    }
    const Vecf qn = unit_normalized(query_vec);
    std::vector<CandidateSet::Entry> scored;
    scored.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto& pair = index.pairs()[i];
        if (!pair_allowed(pair, opts)) continue;
        const double s = dot_accurate(index.rows().row(static_cast<Eigen::Index>(i)), qn.transpose());
        if (s < opts.min_score) continue;
        scored.push_back({pair, s});
    }
    return CandidateSet::from_scored(std::move(scored), k);
}

CandidateSet bm25_topk(const ExemplarIndex& index, const std::vector<std::string>& query_tokens,
                       std::size_t k, const Bm25Params& params, const RetrievalOptions& opts) {
    if (k == 0) throw ValidationError("bm25_topk: k must be >= 1");
    check_fingerprint(index, opts);
    const auto& st = index.sparse();
    const auto n_docs = static_cast<double>(index.size());
    std::unordered_map<std::int32_t, double> acc;
    for (const auto& tok : query_tokens) {
        auto it = st.postings.find(tok);
        if (it == st.postings.end()) continue;
        const auto df = static_cast<double>(it->second.size());
        const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
        for (const auto& [doc, tf] : it->second) {
            const double len_norm =
                1.0 - params.b + params.b * static_cast<double>(st.doc_lens[static_cast<std::size_t>(doc)]) / st.avgdl;
            acc[doc] += idf * (static_cast<double>(tf) * (params.k1 + 1.0)) /
                        (static_cast<double>(tf) + params.k1 * len_norm);
        }
    }
    std::vector<CandidateSet::Entry> scored;
    scored.reserve(acc.size());
    for (const auto& [doc, score] : acc) {
        const auto& pair = index.pairs()[static_cast<std::size_t>(doc)];
        if (!pair_allowed(pair, opts)) continue;
        if (score < opts.min_score) continue;
        scored.push_back({pair, score});
    }
    return CandidateSet::from_scored(std::move(scored), k);
}

CandidateSet maxsim_topk(const ExemplarIndex& index, const Matf& query_token_vecs, std::size_t k,
                         const RetrievalOptions& opts) {
    if (k == 0) throw ValidationError("maxsim_topk: k must be >= 1");
    check_fingerprint(index, opts);
    if (!index.has_token_vectors()) {
        throw IndexError("maxsim requires an index built with token vectors");
    }
    if (query_token_vecs.rows() == 0) return CandidateSet::from_scored({}, k);
    if (query_token_vecs.cols() != index.dim()) {
        throw ValidationError("maxsim_topk: query token dim " +
                              std::to_string(query_token_vecs.cols()) +
                              " does not match index dim " + std::to_string(index.dim()));
    }
    std::vector<CandidateSet::Entry> scored;
    for (std::size_t d = 0; d < index.size(); ++d) {
        const auto& pair = index.pairs()[d];
        if (!pair_allowed(pair, opts)) continue;
        const Matf& doc_toks = index.token_rows(d);
        double score = 0.0;
        for (Eigen::Index q = 0; q < query_token_vecs.rows(); ++q) {
            double best = 0.0;
            bool any = false;
            for (Eigen::Index t = 0; t < doc_toks.rows(); ++t) {
                const double s = dot_accurate(query_token_vecs.row(q), doc_toks.row(t));
                if (!any || s > best) {
                    best = s;
                    any = true;
                }
            }
            if (any) score += best;
        }
        if (score < opts.min_score) continue;
        scored.push_back({pair, score});
    }
    return CandidateSet::from_scored(std::move(scored), k);
}

ClusteredScan::ClusteredScan(const ExemplarIndex& index, int n_clusters, std::uint64_t seed)
    : index_(&index) {
    const auto n = static_cast<Eigen::Index>(index.size());
    if (n == 0) return;
    const auto c = static_cast<Eigen::Index>(
        std::clamp<std::int64_t>(n_clusters, 1, static_cast<std::int64_t>(n)));

    // Deterministic init: shuffle row indices, take the first c as seeds.
    std::vector<std::int32_t> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int32_t>(i);
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    centroids_.resize(c, index.dim());
    for (Eigen::Index j = 0; j < c; ++j) {
        centroids_.row(j) = index.rows().row(order[static_cast<std::size_t>(j)]);
    }

    std::vector<std::int32_t> assign(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < 4; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = -2.0;
            std::int32_t arg = 0;
            for (Eigen::Index j = 0; j < c; ++j) {
                const double s = dot_accurate(centroids_.row(j), index.rows().row(i));
                if (s > best) {
                    best = s;
                    arg = static_cast<std::int32_t>(j);
                }
            }
            assign[static_cast<std::size_t>(i)] = arg;
        }
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sums(c, index.dim());
        sums.setZero();
        std::vector<std::int64_t> counts(static_cast<std::size_t>(c), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(assign[static_cast<std::size_t>(i)]) +=
                index.rows().row(i).cast<double>();
            ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        }
        for (Eigen::Index j = 0; j < c; ++j) {
            if (counts[static_cast<std::size_t>(j)] == 0) continue;  // keep previous centroid
            const double norm = sums.row(j).norm();
            if (norm > 0.0) centroids_.row(j) = (sums.row(j) / norm).cast<float>();
        }
    }
    members_.assign(static_cast<std::size_t>(c), {});
    for (Eigen::Index i = 0; i < n; ++i) {
        members_[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])].push_back(
            static_cast<std::int32_t>(i));
    }
}

CandidateSet ClusteredScan::topk(const Vecf& query_vec, std::size_t k, int probes,
                                 const RetrievalOptions& opts) const {
    if (k == 0) throw ValidationError("clustered topk: k must be >= 1");
    check_fingerprint(*index_, opts);
    if (members_.empty()) return CandidateSet::from_scored({}, k);
    const Vecf qn = unit_normalized(query_vec);

    std::vector<std::pair<double, std::size_t>> cluster_rank;
    cluster_rank.reserve(members_.size());
    for (std::size_t j = 0; j < members_.size(); ++j) {
        cluster_rank.emplace_back(
            dot_accurate(centroids_.row(static_cast<Eigen::Index>(j)), qn.transpose()), j);
    }
    std::sort(cluster_rank.begin(), cluster_rank.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    const auto n_probe = static_cast<std::size_t>(
        std::clamp<std::int64_t>(probes, 1, static_cast<std::int64_t>(members_.size())));

    std::vector<CandidateSet::Entry> scored;
    for (std::size_t p = 0; p < n_probe; ++p) {
        for (std::int32_t i : members_[cluster_rank[p].second]) {
            const auto& pair = index_->pairs()[static_cast<std::size_t>(i)];
            if (!pair_allowed(pair, opts)) continue;
            const double s = dot_accurate(index_->rows().row(i), qn.transpose());
            if (s < opts.min_score) continue;
            scored.push_back({pair, s});
        }
    }
    return CandidateSet::from_scored(std::move(scored), k);
}

}  // namespace icr
