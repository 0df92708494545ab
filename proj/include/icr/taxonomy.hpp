#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace icr {

// A business line with its own intent hierarchy shape.
struct Vertical {
    std::string id;
    std::string display_name;
    std::vector<std::string> level_names;  // coarse to fine; size = max path depth
};

// Ordered label sequence from coarse to fine within one vertical.
struct IntentPath {
    std::string vertical_id;
    std::vector<std::string> labels;

    bool operator==(const IntentPath&) const = default;
    auto operator<=>(const IntentPath&) const = default;
};

struct CatalogViolation {
    std::string node;  // rendered path, or vertical id for vertical-level rules
    std::string rule;
    std::string detail;
};

// Immutable after load; safe for unlimited concurrent readers. Construction
// is permissive so that invalid states can be built and reported by
// validate_catalog; the JSON loader is strict and throws instead.
class IntentCatalog {
public:
    void add_vertical(Vertical v);
    void add_intent(IntentPath p);  // dedups; no structural checks

    const std::map<std::string, Vertical>& verticals() const { return verticals_; }
    const std::vector<IntentPath>& intents() const { return intents_; }

    const Vertical* find_vertical(std::string_view id) const;
    const Vertical& vertical_at(std::string_view id) const;  // throws ValidationError
    bool has_intent(const IntentPath& p) const { return keys_.count(p) > 0; }

    // Distinct next-level labels under `prefix` (empty prefix = level one),
    // in first-seen order over the stored intents.
    std::vector<std::string> child_labels(std::string_view vertical_id,
                                          const std::vector<std::string>& prefix) const;

    int branching_limit = 50;  // per-node child bound checked by validate_catalog

private:
    std::map<std::string, Vertical> verticals_;
    std::vector<IntentPath> intents_;
    std::set<IntentPath> keys_;
};

// Splits on '>' with whitespace trimming and NFC normalization of each label.
// Throws ValidationError on empty segments, unknown vertical, or depth beyond
// the vertical's level count.
IntentPath parse_intent_path(std::string_view s, std::string_view vertical_id,
                             const IntentCatalog& catalog);

// Joins labels with " > "; parse_intent_path(render_intent_path(p)) == p.
std::string render_intent_path(const IntentPath& p);

// First `depth` labels; throws ValidationError when depth is 0 or exceeds
// the path length.
IntentPath path_prefix(const IntentPath& p, std::size_t depth);

// Reports every invariant violation as data: unknown vertical, empty or
// separator-bearing labels, depth overflow, branching factor above the
// catalog's limit. Deterministic and order-independent over the intent set.
std::vector<CatalogViolation> validate_catalog(const IntentCatalog& c);

// JSON document with `verticals` and `intents` arrays plus an optional
// `branching_limit`; unknown fields are rejected with ConfigError.
IntentCatalog catalog_from_json(const std::string& json_text);
std::string catalog_to_json(const IntentCatalog& c);
IntentCatalog load_catalog(const std::string& path);
void save_catalog(const IntentCatalog& c, const std::string& path);

}  // namespace icr
