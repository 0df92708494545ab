#include "icr/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "icr/common.hpp"
#include "icr/textproc.hpp"

namespace icr {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

void reject_unknown_fields(const json& obj, std::initializer_list<std::string_view> known,
                           std::string_view where) {
    for (const auto& item : obj.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            throw ConfigError("unknown field \"" + item.key() + "\" in " + std::string(where));
        }
    }
}

}  // namespace

void IntentCatalog::add_vertical(Vertical v) {
    if (v.id.empty()) throw ValidationError("vertical id must be non-empty");
    if (verticals_.count(v.id)) throw ValidationError("duplicate vertical id \"" + v.id + "\"");
    verticals_.emplace(v.id, std::move(v));
}

void IntentCatalog::add_intent(IntentPath p) {
    if (keys_.count(p)) return;
    keys_.insert(p);
    intents_.push_back(std::move(p));
}

const Vertical* IntentCatalog::find_vertical(std::string_view id) const {
    auto it = verticals_.find(std::string(id));
    return it == verticals_.end() ? nullptr : &it->second;
}

const Vertical& IntentCatalog::vertical_at(std::string_view id) const {
    const Vertical* v = find_vertical(id);
    if (!v) throw ValidationError("unknown vertical \"" + std::string(id) + "\"");
    return *v;
}

std::vector<std::string> IntentCatalog::child_labels(
    std::string_view vertical_id, const std::vector<std::string>& prefix) const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& p : intents_) {
        if (p.vertical_id != vertical_id || p.labels.size() <= prefix.size()) continue;
        if (!std::equal(prefix.begin(), prefix.end(), p.labels.begin())) continue;
        const std::string& next = p.labels[prefix.size()];
        if (seen.insert(next).second) out.push_back(next);
    }
    return out;
}

IntentPath parse_intent_path(std::string_view s, std::string_view vertical_id,
                             const IntentCatalog& catalog) {
    const Vertical& v = catalog.vertical_at(vertical_id);
    IntentPath p;
    p.vertical_id = std::string(vertical_id);
    std::size_t pos = 0;
    while (true) {
        std::size_t sep = s.find('>', pos);
        std::string_view raw =
            sep == std::string_view::npos ? s.substr(pos) : s.substr(pos, sep - pos);
        std::string label = nfc_compose(trim(raw));
        if (label.empty()) {
            throw ValidationError("empty segment in intent path \"" + std::string(s) + "\"");
        }
        p.labels.push_back(std::move(label));
        if (sep == std::string_view::npos) break;
        pos = sep + 1;
    }
    if (p.labels.size() > v.level_names.size()) {
        throw ValidationError("path \"" + std::string(s) + "\" has depth " +
                              std::to_string(p.labels.size()) + " but vertical \"" + v.id +
                              "\" defines " + std::to_string(v.level_names.size()) + " levels");
    }
    return p;
}

std::string render_intent_path(const IntentPath& p) {
    std::string out;
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
        if (i) out += " > ";
        out += p.labels[i];
    }
    return out;
}

IntentPath path_prefix(const IntentPath& p, std::size_t depth) {
    if (depth == 0 || depth > p.labels.size()) {
        throw ValidationError("prefix depth " + std::to_string(depth) +
                              " out of range for path of depth " +
                              std::to_string(p.labels.size()));
    }
    IntentPath out;
    out.vertical_id = p.vertical_id;
    out.labels.assign(p.labels.begin(), p.labels.begin() + static_cast<std::ptrdiff_t>(depth));
    return out;
}

std::vector<CatalogViolation> validate_catalog(const IntentCatalog& c) {
    std::vector<CatalogViolation> out;
    for (const auto& [id, v] : c.verticals()) {
        if (v.level_names.empty()) {
            out.push_back({id, "empty_level_names", "vertical defines no levels"});
        }
    }
    // Structural checks per path, then per-node branching counts. Maps keep
    // the report deterministic regardless of insertion order.
    std::map<std::pair<std::string, std::vector<std::string>>, std::set<std::string>> children;
    for (const auto& p : c.intents()) {
        const std::string node = p.vertical_id + ": " + render_intent_path(p);
        const Vertical* v = c.find_vertical(p.vertical_id);
        if (!v) {
            out.push_back({node, "unknown_vertical",
                           "intent references vertical \"" + p.vertical_id + "\""});
            continue;
        }
        if (p.labels.empty()) {
            out.push_back({node, "empty_path", "intent has no labels"});
            continue;
        }
        if (p.labels.size() > v->level_names.size()) {
            out.push_back({node, "depth_exceeds_levels",
                           "depth " + std::to_string(p.labels.size()) + " > " +
                               std::to_string(v->level_names.size())});
        }
        bool labels_ok = true;
        for (const auto& label : p.labels) {
            if (label.empty() || label.find('>') != std::string::npos ||
                trim(label).size() != label.size()) {
                out.push_back({node, "bad_label", "label \"" + label + "\" is empty, " +
                                                      "untrimmed, or contains the separator"});
                labels_ok = false;
            }
        }
        if (!labels_ok) continue;
        for (std::size_t d = 0; d < p.labels.size(); ++d) {
            std::vector<std::string> prefix(p.labels.begin(),
                                            p.labels.begin() + static_cast<std::ptrdiff_t>(d));
            children[{p.vertical_id, std::move(prefix)}].insert(p.labels[d]);
        }
    }
    for (const auto& [node, kids] : children) {
        if (static_cast<int>(kids.size()) > c.branching_limit) {
            IntentPath as_path{node.first, node.second};
            std::string name = node.first + ": " +
                               (node.second.empty() ? "<root>" : render_intent_path(as_path));
            out.push_back({name, "branching_factor",
                           std::to_string(kids.size()) + " children exceed limit " +
                               std::to_string(c.branching_limit)});
        }
    }
    // Report order must not depend on intent insertion order.
    std::sort(out.begin(), out.end(), [](const CatalogViolation& a, const CatalogViolation& b) {
        return std::tie(a.node, a.rule, a.detail) < std::tie(b.node, b.rule, b.detail);
    });
    return out;
}

IntentCatalog catalog_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("catalog is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("catalog root must be a JSON object");
    reject_unknown_fields(j, {"verticals", "intents", "branching_limit"}, "catalog");

    IntentCatalog cat;
    if (j.contains("branching_limit")) {
        if (!j["branching_limit"].is_number_integer() || j["branching_limit"].get<int>() < 1) {
            throw ConfigError("branching_limit must be a positive integer");
        }
        cat.branching_limit = j["branching_limit"].get<int>();
    }
    for (const auto& jv : j.value("verticals", json::array())) {
        if (!jv.is_object()) throw ConfigError("vertical entries must be objects");
        reject_unknown_fields(jv, {"id", "display_name", "level_names"}, "vertical");
        Vertical v;
        v.id = jv.at("id").get<std::string>();
        v.display_name = jv.value("display_name", v.id);
        for (const auto& name : jv.at("level_names")) {
            v.level_names.push_back(name.get<std::string>());
        }
        if (v.level_names.empty()) {
            throw ConfigError("vertical \"" + v.id + "\" must define at least one level");
        }
        cat.add_vertical(std::move(v));
    }
    for (const auto& ji : j.value("intents", json::array())) {
        if (!ji.is_object()) throw ConfigError("intent entries must be objects");
        reject_unknown_fields(ji, {"vertical", "path"}, "intent");
        cat.add_intent(parse_intent_path(ji.at("path").get<std::string>(),
                                         ji.at("vertical").get<std::string>(), cat));
    }
    return cat;
}

std::string catalog_to_json(const IntentCatalog& c) {
    json j;
    j["branching_limit"] = c.branching_limit;
    j["verticals"] = json::array();
    for (const auto& [id, v] : c.verticals()) {
        j["verticals"].push_back(
            {{"id", v.id}, {"display_name", v.display_name}, {"level_names", v.level_names}});
    }
    j["intents"] = json::array();
    for (const auto& p : c.intents()) {
        j["intents"].push_back({{"vertical", p.vertical_id}, {"path", render_intent_path(p)}});
    }
    return j.dump(2) + "\n";
}

IntentCatalog load_catalog(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open catalog file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return catalog_from_json(buf.str());
}

void save_catalog(const IntentCatalog& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write catalog file: " + path);
    out << catalog_to_json(c);
}

}  // namespace icr
