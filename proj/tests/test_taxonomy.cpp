#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "icr/common.hpp"
#include "icr/taxonomy.hpp"

using namespace icr;

namespace {

IntentCatalog demo_catalog() {
    IntentCatalog cat;
    cat.add_vertical({"3p", "Retail", {"Category", "Topic", "Action"}});
    cat.add_vertical({"1p", "Digital", {"Family", "Product", "Topic", "Action"}});
    cat.add_intent(parse_intent_path("Order Issue > Track Order", "3p", cat));
    cat.add_intent(parse_intent_path("Order Issue > Cancel Order", "3p", cat));
    cat.add_intent(parse_intent_path("Returns > Start Return > Print Label", "3p", cat));
    cat.add_intent(parse_intent_path("Devices > Tablet > Screen > Replace", "1p", cat));
    return cat;
}

}  // namespace

TEST_CASE("parse_intent_path splits, trims, and validates depth") {
    IntentCatalog cat = demo_catalog();
    IntentPath p = parse_intent_path("Order Issue > Track Order", "3p", cat);
    CHECK(p.vertical_id == "3p");
    CHECK(p.labels == std::vector<std::string>{"Order Issue", "Track Order"});
    CHECK(parse_intent_path("A", "3p", cat).labels == std::vector<std::string>{"A"});
    CHECK(parse_intent_path("A>B", "3p", cat).labels == std::vector<std::string>{"A", "B"});

    CHECK_THROWS_AS(parse_intent_path("A > > B", "3p", cat), ValidationError);
    CHECK_THROWS_AS(parse_intent_path("A > B", "nope", cat), ValidationError);
    CHECK_THROWS_AS(parse_intent_path("A > B > C > D", "3p", cat), ValidationError);
}

TEST_CASE("labels compare case-sensitively") {
    IntentCatalog cat = demo_catalog();
    CHECK(parse_intent_path("order issue", "3p", cat) != parse_intent_path("Order Issue", "3p", cat));
}

TEST_CASE("render_intent_path joins with canonical separator") {
    CHECK(render_intent_path({"3p", {"Order Issue", "Track Order"}}) ==
          "Order Issue > Track Order");
    CHECK(render_intent_path({"3p", {"A"}}) == "A");
}

TEST_CASE("parse and render round-trip over generated paths") {
    IntentCatalog cat;
    cat.add_vertical({"3p", "Retail", {"L1", "L2", "L3"}});
    Rng rng(0xABCDULL);
    const std::string words[] = {"Order", "Return", "Track", "Cancel", "Refund",
                                 "Exposé", "Device", "Payment", "Gift", "Prime"};
    for (int i = 0; i < 1000; ++i) {
        IntentPath p;
        p.vertical_id = "3p";
        const std::size_t depth = 1 + rng.below(3);
        for (std::size_t d = 0; d < depth; ++d) {
            std::string label = words[rng.below(std::size(words))];
            if (rng.chance(0.5)) label += " " + words[rng.below(std::size(words))];
            p.labels.push_back(label);
        }
        CHECK(parse_intent_path(render_intent_path(p), "3p", cat) == p);
    }
}

TEST_CASE("path_prefix returns leading labels and rejects bad depths") {
    IntentPath p{"3p", {"Order Issue", "Track Order"}};
    CHECK(path_prefix(p, 1) == IntentPath{"3p", {"Order Issue"}});
    CHECK(path_prefix(p, 2) == p);
    CHECK_THROWS_AS(path_prefix(p, 0), ValidationError);
    CHECK_THROWS_AS(path_prefix(p, 3), ValidationError);
}

TEST_CASE("every prefix of every catalog path validates") {
    IntentCatalog cat = demo_catalog();
    IntentCatalog with_prefixes = demo_catalog();
    for (const auto& p : cat.intents()) {
        for (std::size_t d = 1; d <= p.labels.size(); ++d) {
            IntentPath prefix = path_prefix(p, d);
            CHECK(parse_intent_path(render_intent_path(prefix), p.vertical_id, cat) == prefix);
            with_prefixes.add_intent(prefix);
        }
    }
    CHECK(validate_catalog(with_prefixes).empty());
}

TEST_CASE("child_labels lists next-level labels in first-seen order") {
    IntentCatalog cat = demo_catalog();
    CHECK(cat.child_labels("3p", {}) == std::vector<std::string>{"Order Issue", "Returns"});
    CHECK(cat.child_labels("3p", {"Order Issue"}) ==
          std::vector<std::string>{"Track Order", "Cancel Order"});
    CHECK(cat.child_labels("3p", {"Missing"}).empty());
}

TEST_CASE("validate_catalog reports branching-factor violations") {
    IntentCatalog cat;
    cat.add_vertical({"v", "V", {"L1", "L2"}});
    for (int i = 0; i < 51; ++i) {
        cat.add_intent({"v", {"Root", "Child " + std::to_string(i)}});
    }
    auto violations = validate_catalog(cat);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule == "branching_factor");
    CHECK(violations[0].node == "v: Root");

    cat.branching_limit = 51;
    CHECK(validate_catalog(cat).empty());
}

TEST_CASE("validate_catalog flags orphan verticals and is order-independent") {
    IntentCatalog empty;
    CHECK(validate_catalog(empty).empty());

    IntentCatalog a;
    a.add_vertical({"v", "V", {"L1"}});
    a.add_intent({"ghost", {"X"}});
    a.add_intent({"v", {"Ok"}});
    auto va = validate_catalog(a);
    REQUIRE(va.size() == 1);
    CHECK(va[0].rule == "unknown_vertical");

    IntentCatalog b;
    b.add_vertical({"v", "V", {"L1"}});
    b.add_intent({"v", {"Ok"}});
    b.add_intent({"ghost", {"X"}});
    auto vb = validate_catalog(b);
    REQUIRE(vb.size() == 1);
    CHECK(vb[0].node == va[0].node);
    CHECK(vb[0].rule == va[0].rule);
}

TEST_CASE("catalog JSON round-trips and rejects unknown fields") {
    IntentCatalog cat = demo_catalog();
    cat.branching_limit = 40;
    IntentCatalog back = catalog_from_json(catalog_to_json(cat));
    CHECK(back.branching_limit == 40);
    CHECK(back.intents() == cat.intents());
    REQUIRE(back.verticals().size() == 2);
    CHECK(back.vertical_at("1p").level_names == cat.vertical_at("1p").level_names);
    CHECK(back.vertical_at("3p").display_name == "Retail");

    CHECK_THROWS_AS(catalog_from_json(R"({"verticals": [], "intents": [], "extra": 1})"),
                    ConfigError);
    CHECK_THROWS_AS(catalog_from_json(
                        R"({"verticals": [{"id": "v", "level_names": ["L"], "color": "red"}],
                            "intents": []})"),
                    ConfigError);
    CHECK_THROWS_AS(catalog_from_json(
                        R"({"verticals": [{"id": "v", "level_names": ["L"]}],
                            "intents": [{"vertical": "v", "path": "A", "weight": 2}]})"),
                    ConfigError);
    CHECK_THROWS_AS(catalog_from_json("not json"), ConfigError);
    CHECK_THROWS_AS(catalog_from_json(R"({"branching_limit": 0, "verticals": [], "intents": []})"),
                    ConfigError);
}

TEST_CASE("catalog save and load round-trip through a file") {
    IntentCatalog cat = demo_catalog();
    const auto path = std::filesystem::temp_directory_path() / "icr_catalog_test.json";
    save_catalog(cat, path.string());
    IntentCatalog back = load_catalog(path.string());
    CHECK(back.intents() == cat.intents());
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_catalog(path.string()), ConfigError);
}
