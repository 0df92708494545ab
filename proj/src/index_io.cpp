#include "icr/index_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "icr/common.hpp"

namespace icr {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'I', 'C', 'R', 'I', 'D', 'X', '0', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagTokenVectors = 1u;

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_str(std::string& buf, const std::string& s) {
    put_u32(buf, static_cast<std::uint32_t>(s.size()));
    buf.append(s);
}

void put_f32(std::string& buf, float f) { put_u32(buf, std::bit_cast<std::uint32_t>(f)); }

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw IndexError("truncated index file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
        pos += 8;
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
    float f32() { return std::bit_cast<float>(u32()); }
};

}  // namespace

void save_index(const ExemplarIndex& index, const std::string& path) {
    std::string buf;
    buf.append(kMagic, sizeof(kMagic));
    put_u32(buf, kVersion);
    put_u32(buf, index.has_token_vectors() ? kFlagTokenVectors : 0u);
    put_u32(buf, static_cast<std::uint32_t>(index.dim()));
    put_str(buf, index.fingerprint());
    put_u64(buf, index.size());
    for (const auto& p : index.pairs()) {
        put_u64(buf, static_cast<std::uint64_t>(p.id));
        put_str(buf, p.query);
        put_str(buf, p.intent.vertical_id);
        put_u32(buf, static_cast<std::uint32_t>(p.intent.labels.size()));
        for (const auto& label : p.intent.labels) put_str(buf, label);
    }
    for (std::size_t i = 0; i < index.size(); ++i) {
        for (int d = 0; d < index.dim(); ++d) {
            put_f32(buf, index.rows()(static_cast<Eigen::Index>(i), d));
        }
    }
    if (index.has_token_vectors()) {
        for (std::size_t i = 0; i < index.size(); ++i) {
            const Matf& tok = index.token_rows(i);
            put_u32(buf, static_cast<std::uint32_t>(tok.rows()));
            for (Eigen::Index t = 0; t < tok.rows(); ++t) {
                for (int d = 0; d < index.dim(); ++d) put_f32(buf, tok(t, d));
            }
        }
    }
    put_u64(buf, fnv1a64(buf));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IndexError("cannot write index file: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IndexError("short write to index file: " + path);
}

ExemplarIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IndexError("cannot open index file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string buf = ss.str();

    if (buf.size() < sizeof(kMagic) + 8 || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
        throw IndexError("not an index file (bad magic): " + path);
    }
    const std::string body = buf.substr(0, buf.size() - 8);
    Reader trailer{buf, buf.size() - 8};
    if (trailer.u64() != fnv1a64(body)) throw IndexError("index checksum mismatch: " + path);

    Reader r{body, sizeof(kMagic)};
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw IndexError("unsupported index version " + std::to_string(version));
    }
    const std::uint32_t flags = r.u32();
    const bool token_vectors = (flags & kFlagTokenVectors) != 0;
    const auto dim = static_cast<int>(r.u32());
    const std::string fingerprint = r.str();
    const std::uint64_t count = r.u64();

    std::vector<ExemplarPair> pairs;
    pairs.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        ExemplarPair p;
        p.id = static_cast<std::int64_t>(r.u64());
        p.query = r.str();
        p.intent.vertical_id = r.str();
        const std::uint32_t n_labels = r.u32();
        for (std::uint32_t l = 0; l < n_labels; ++l) p.intent.labels.push_back(r.str());
        pairs.push_back(std::move(p));
    }
    Matf rows(static_cast<Eigen::Index>(count), dim);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (int d = 0; d < dim; ++d) rows(i, d) = r.f32();
    }
    std::vector<Matf> token_rows;
    if (token_vectors) {
        token_rows.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            const std::uint32_t n_tok = r.u32();
            Matf tok(static_cast<Eigen::Index>(n_tok), dim);
            for (Eigen::Index t = 0; t < tok.rows(); ++t) {
                for (int d = 0; d < dim; ++d) tok(t, d) = r.f32();
            }
            token_rows.push_back(std::move(tok));
        }
    }
    if (r.pos != body.size()) throw IndexError("trailing bytes in index file: " + path);
    return ExemplarIndex::from_parts(fingerprint, dim, token_vectors, std::move(pairs),
                                     std::move(rows), std::move(token_rows));
}

std::vector<ExemplarPair> read_corpus_jsonl(const std::string& path,
                                            const IntentCatalog& catalog) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open corpus file: " + path);
    std::vector<ExemplarPair> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path + " line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(where + ": not valid JSON: " + e.what(), line_no);
        }
        try {
            if (!j.is_object()) throw ValidationError("record must be a JSON object");
            for (const auto& item : j.items()) {
                if (item.key() != "id" && item.key() != "query" && item.key() != "vertical" &&
                    item.key() != "intent") {
                    throw ValidationError("unknown field \"" + item.key() + "\"");
                }
            }
            ExemplarPair p;
            p.id = j.at("id").get<std::int64_t>();
            p.query = j.at("query").get<std::string>();
            p.intent = parse_intent_path(j.at("intent").get<std::string>(),
                                         j.at("vertical").get<std::string>(), catalog);
            validate_pair(p, catalog);
            pairs.push_back(std::move(p));
        } catch (const json::exception& e) {
            throw ValidationError(where + ": " + e.what(), line_no);
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what(), line_no);
        }
    }
    return pairs;
}

void write_corpus_jsonl(const std::vector<ExemplarPair>& pairs, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write corpus file: " + path);
    for (const auto& p : pairs) {
        json j{{"id", p.id},
               {"query", p.query},
               {"vertical", p.intent.vertical_id},
               {"intent", render_intent_path(p.intent)}};
        out << j.dump() << "\n";
    }
}

}  // namespace icr
