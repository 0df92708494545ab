#pragma once

#include <string>
#include <vector>

#include "icr/retrieval.hpp"
#include "icr/taxonomy.hpp"

namespace icr {

// Little-endian binary blocks: magic, version, flags, dim, provider
// fingerprint, length-prefixed pair table, float32 row matrix, optional
// per-token matrices, trailing FNV-1a checksum. load(save(x)) reproduces x's
// query results bit-for-bit.
void save_index(const ExemplarIndex& index, const std::string& path);
ExemplarIndex load_index(const std::string& path);

// One JSON object per line: {id, query, vertical, intent}. Errors carry the
// offending 1-based line number.
std::vector<ExemplarPair> read_corpus_jsonl(const std::string& path,
                                            const IntentCatalog& catalog);
void write_corpus_jsonl(const std::vector<ExemplarPair>& pairs, const std::string& path);

}  // namespace icr
