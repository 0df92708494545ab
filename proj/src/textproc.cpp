#include "icr/textproc.hpp"

#include <array>
#include <cstdint>
#include <unordered_map>

namespace icr {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one codepoint starting at `i`, advancing `i`. Invalid sequences
// yield U+FFFD and advance a single byte.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return kReplacement;
    }
    if (i + len > s.size()) {
        ++i;
        return kReplacement;
    }
    for (int k = 1; k < len; ++k) {
        unsigned char bk = byte(i + k);
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return kReplacement;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    // Reject overlong encodings and surrogates.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
        ++i;
        return kReplacement;
    }
    i += len;
    return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::vector<char32_t> decode_all(std::string_view s) {
    std::vector<char32_t> cps;
    cps.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) cps.push_back(decode_utf8(s, i));
    return cps;
}

struct Composition {
    char32_t base;
    char32_t mark;
    char32_t composed;
};

// Canonical compositions for the combining marks commonly seen in Latin-script
// text: grave, acute, circumflex, tilde, macron, diaeresis, ring, caron,
// cedilla. Keyed (base << 11 | mark-index) at lookup time.
constexpr std::array<Composition, 94> kCompositions{{
    // grave U+0300
    {U'A', 0x0300, 0x00C0}, {U'E', 0x0300, 0x00C8}, {U'I', 0x0300, 0x00CC},
    {U'O', 0x0300, 0x00D2}, {U'U', 0x0300, 0x00D9},
    {U'a', 0x0300, 0x00E0}, {U'e', 0x0300, 0x00E8}, {U'i', 0x0300, 0x00EC},
    {U'o', 0x0300, 0x00F2}, {U'u', 0x0300, 0x00F9},
    // acute U+0301
    {U'A', 0x0301, 0x00C1}, {U'E', 0x0301, 0x00C9}, {U'I', 0x0301, 0x00CD},
    {U'O', 0x0301, 0x00D3}, {U'U', 0x0301, 0x00DA}, {U'Y', 0x0301, 0x00DD},
    {U'a', 0x0301, 0x00E1}, {U'e', 0x0301, 0x00E9}, {U'i', 0x0301, 0x00ED},
    {U'o', 0x0301, 0x00F3}, {U'u', 0x0301, 0x00FA}, {U'y', 0x0301, 0x00FD},
    {U'C', 0x0301, 0x0106}, {U'c', 0x0301, 0x0107}, {U'N', 0x0301, 0x0143},
    {U'n', 0x0301, 0x0144}, {U'S', 0x0301, 0x015A}, {U's', 0x0301, 0x015B},
    {U'Z', 0x0301, 0x0179}, {U'z', 0x0301, 0x017A}, {U'L', 0x0301, 0x0139},
    {U'l', 0x0301, 0x013A}, {U'R', 0x0301, 0x0154}, {U'r', 0x0301, 0x0155},
    // circumflex U+0302
    {U'A', 0x0302, 0x00C2}, {U'E', 0x0302, 0x00CA}, {U'I', 0x0302, 0x00CE},
    {U'O', 0x0302, 0x00D4}, {U'U', 0x0302, 0x00DB},
    {U'a', 0x0302, 0x00E2}, {U'e', 0x0302, 0x00EA}, {U'i', 0x0302, 0x00EE},
    {U'o', 0x0302, 0x00F4}, {U'u', 0x0302, 0x00FB},
    // tilde U+0303
    {U'A', 0x0303, 0x00C3}, {U'N', 0x0303, 0x00D1}, {U'O', 0x0303, 0x00D5},
    {U'a', 0x0303, 0x00E3}, {U'n', 0x0303, 0x00F1}, {U'o', 0x0303, 0x00F5},
    // macron U+0304
    {U'A', 0x0304, 0x0100}, {U'a', 0x0304, 0x0101}, {U'E', 0x0304, 0x0112},
    {U'e', 0x0304, 0x0113}, {U'I', 0x0304, 0x012A}, {U'i', 0x0304, 0x012B},
    {U'O', 0x0304, 0x014C}, {U'o', 0x0304, 0x014D}, {U'U', 0x0304, 0x016A},
    {U'u', 0x0304, 0x016B},
    // diaeresis U+0308
    {U'A', 0x0308, 0x00C4}, {U'E', 0x0308, 0x00CB}, {U'I', 0x0308, 0x00CF},
    {U'O', 0x0308, 0x00D6}, {U'U', 0x0308, 0x00DC},
    {U'a', 0x0308, 0x00E4}, {U'e', 0x0308, 0x00EB}, {U'i', 0x0308, 0x00EF},
    {U'o', 0x0308, 0x00F6}, {U'u', 0x0308, 0x00FC}, {U'y', 0x0308, 0x00FF},
    {U'Y', 0x0308, 0x0178},
    // ring above U+030A
    {U'A', 0x030A, 0x00C5}, {U'a', 0x030A, 0x00E5},
    // caron U+030C
    {U'C', 0x030C, 0x010C}, {U'c', 0x030C, 0x010D}, {U'E', 0x030C, 0x011A},
    {U'e', 0x030C, 0x011B}, {U'R', 0x030C, 0x0158}, {U'r', 0x030C, 0x0159},
    {U'S', 0x030C, 0x0160}, {U's', 0x030C, 0x0161}, {U'Z', 0x030C, 0x017D},
    {U'z', 0x030C, 0x017E}, {U'D', 0x030C, 0x010E}, {U'd', 0x030C, 0x010F},
    {U'N', 0x030C, 0x0147}, {U'n', 0x030C, 0x0148}, {U'T', 0x030C, 0x0164},
    {U't', 0x030C, 0x0165},
    // cedilla U+0327
    {U'C', 0x0327, 0x00C7}, {U'c', 0x0327, 0x00E7}, {U'S', 0x0327, 0x015E},
    {U's', 0x0327, 0x015F},
}};

const std::unordered_map<std::uint64_t, char32_t>& composition_map() {
    static const auto* map = [] {
        auto* m = new std::unordered_map<std::uint64_t, char32_t>();
        for (const auto& c : kCompositions) {
            m->emplace((static_cast<std::uint64_t>(c.base) << 32) | c.mark, c.composed);
        }
        return m;
    }();
    return *map;
}

char32_t lower_cp(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    // Latin-1 uppercase block, skipping the multiplication sign.
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
    // Latin Extended-A pairs upper/lower on even/odd codepoints, with a few
    // exceptions handled explicitly.
    if (cp == 0x0130) return U'i';    // I with dot above
    if (cp == 0x0178) return 0x00FF;  // Y with diaeresis
    if (cp >= 0x0100 && cp <= 0x0177 && (cp % 2) == 0) return cp + 1;
    if (cp == 0x0179 || cp == 0x017B || cp == 0x017D) return cp + 1;
    return cp;
}

bool is_space_cp(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
           cp == U'\v' || cp == 0x00A0 || cp == 0x2028 || cp == 0x2029 || cp == 0x3000;
}

std::vector<char32_t> compose_cps(const std::vector<char32_t>& in) {
    std::vector<char32_t> out;
    out.reserve(in.size());
    const auto& map = composition_map();
    for (char32_t cp : in) {
        if (!out.empty()) {
            auto it = map.find((static_cast<std::uint64_t>(out.back()) << 32) | cp);
            if (it != map.end()) {
                out.back() = it->second;
                continue;
            }
        }
        out.push_back(cp);
    }
    return out;
}

}  // namespace

std::string nfc_compose(std::string_view utf8) {
    auto composed = compose_cps(decode_all(utf8));
    std::string out;
    out.reserve(utf8.size());
    for (char32_t cp : composed) encode_utf8(cp, out);
    return out;
}

std::string normalize(std::string_view text) {
    auto cps = compose_cps(decode_all(text));
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    bool emitted = false;
    for (char32_t cp : cps) {
        if (is_space_cp(cp)) {
            pending_space = emitted;  // drop leading whitespace
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        encode_utf8(lower_cp(cp), out);
        emitted = true;
    }
    return out;
}

TokenStream tokenize(std::string_view text) {
    TokenStream ts;
    ts.source_len = decode_all(text).size();
    const std::string norm = normalize(text);
    std::string current;
    std::size_t i = 0;
    while (i < norm.size()) {
        std::size_t start = i;
        char32_t cp = decode_utf8(norm, i);
        const bool token_char =
            (cp >= U'a' && cp <= U'z') || (cp >= U'0' && cp <= U'9') || cp >= 0x80;
        if (token_char) {
            current.append(norm, start, i - start);
        } else if (!current.empty()) {
            ts.tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) ts.tokens.push_back(std::move(current));
    return ts;
}

std::vector<std::string> whitespace_tokens(std::string_view normalized) {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < normalized.size()) {
        std::size_t space = normalized.find(' ', pos);
        if (space == std::string_view::npos) space = normalized.size();
        if (space > pos) tokens.emplace_back(normalized.substr(pos, space - pos));
        pos = space + 1;
    }
    return tokens;
}

}  // namespace icr
