#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace icr {

struct TokenStream {
    std::vector<std::string> tokens;   // lowercase, normalized
    std::size_t source_len = 0;        // codepoint count of the original text
};

// Canonical composition (NFC) for the Latin combining sequences that show up
// in customer text: base letter + combining mark -> precomposed codepoint.
// Codepoints without a composition entry pass through unchanged, so the
// function is idempotent. Invalid UTF-8 bytes decode to U+FFFD.
std::string nfc_compose(std::string_view utf8);

// nfc_compose + lowercase (ASCII, Latin-1 and Latin Extended-A ranges) +
// whitespace collapsed to single ASCII spaces, trimmed at both ends.
// Idempotent and locale-independent.
std::string normalize(std::string_view text);

// Splits normalize(text) on non-alphanumeric boundaries. ASCII letters and
// digits are token characters; so is every codepoint >= U+0080, which keeps
// non-ASCII words intact without locale tables.
TokenStream tokenize(std::string_view text);

// Splits already-normalized text on single spaces. This is the word
// granularity the mock logit provider scores at; unlike tokenize() it keeps
// punctuation such as ">" as standalone tokens.
std::vector<std::string> whitespace_tokens(std::string_view normalized);

}  // namespace icr
