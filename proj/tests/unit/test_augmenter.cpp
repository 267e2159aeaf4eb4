#include <doctest.h>

#include "fixtures.hpp"
#include "motivrec/augmenter.hpp"
#include "motivrec/error.hpp"
#include "motivrec/text.hpp"

using namespace motivrec;

namespace {

std::map<std::string, ItemRecord> catalog() {
    std::map<std::string, ItemRecord> items;
    auto add = [&](const std::string& id, const std::string& title, const std::string& genres) {
        items[id] = ItemRecord{id, {{"title", title}, {"genres", genres}}, std::nullopt, std::nullopt, std::nullopt, 0};
    };
    add("1", "Alien (1979)", "Sci-Fi|Horror");
    add("2", "Patton (1970)", "War|Drama");
    add("3", "Heat (1995)", "Crime|Thriller");
    return items;
}

bool mentions(const GenerationRequest& r, const std::string& needle) {
    return r.prompt.find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE("item-augmenter") {

TEST_CASE("a described item gets metadata then description") {
    fixture::MockGateway gw;
    const auto items = catalog();
    const auto r = augment_item(items.at("1"), *gw);
    CHECK_FALSE(r.degraded);
    REQUIRE(r.item.description);
    CHECK(r.item.description->find("Sci-Fi") != std::string::npos);
    REQUIRE(r.item.augmented_text);
    CHECK(*r.item.augmented_text == text::serialize_metadata(items.at("1").raw_metadata) + "\n\n" + *r.item.description);
    CHECK(r.item.raw_metadata == items.at("1").raw_metadata);
}

TEST_CASE("an item without metadata is rejected") {
    fixture::MockGateway gw;
    ItemRecord bare{"x", {}, std::nullopt, std::nullopt, std::nullopt, 0};
    CHECK_THROWS_AS(augment_item(bare, *gw), InputError);
}

TEST_CASE("a failed generation degrades to the serialized metadata") {
    fixture::MockGateway gw;
    gw.mock->fail_generation = [](const GenerationRequest&) { return true; };
    const auto items = catalog();
    const auto r = augment_item(items.at("2"), *gw);
    CHECK(r.degraded);
    CHECK_FALSE(r.item.description);
    CHECK(*r.item.augmented_text == text::serialize_metadata(items.at("2").raw_metadata));
    CHECK_FALSE(r.error.empty());

    fixture::MockGateway unparsable;
    unparsable.mock->override_output = [](const GenerationRequest&) { return std::optional<std::string>("   "); };
    CHECK(augment_item(items.at("2"), *unparsable).degraded);
}

TEST_CASE("one failing item out of three leaves the rest described") {
    fixture::MockGateway gw(64);
    gw.mock->fail_generation = [](const GenerationRequest& r) { return mentions(r, "Patton"); };
    auto items = catalog();
    VectorIndex index(64);
    const auto report = build_item_index(items, *gw, index);
    CHECK(report.succeeded == 2);
    CHECK(report.degraded == 1);
    CHECK(report.degraded_items == std::vector<std::string>{"2"});
    CHECK(index.size(Scope::items()) == 3);
    CHECK_FALSE(items.at("2").description);
    CHECK(items.at("1").description);

    // Embeddings come from the description, or from the fallback text.
    CHECK(*items.at("1").embedding == gw->embed_one(*items.at("1").description));
    CHECK(*items.at("2").embedding == gw->embed_one(*items.at("2").augmented_text));
    for (const auto& [id, item] : items) CHECK(*index.find(Scope::items(), id) == *item.embedding);
}

TEST_CASE("every item failing is an error") {
    fixture::MockGateway gw(32);
    gw.mock->fail_generation = [](const GenerationRequest&) { return true; };
    auto items = catalog();
    VectorIndex index(32);
    CHECK_THROWS_AS(build_item_index(items, *gw, index), Error);

    std::map<std::string, ItemRecord> none;
    CHECK_THROWS_AS(build_item_index(none, *gw, index), InputError);
    VectorIndex wrong(8);
    auto again = catalog();
    CHECK_THROWS_AS(build_item_index(again, *gw, wrong), DimensionError);
}

TEST_CASE("index bytes are identical across runs and worker counts") {
    const auto corpus = fixture::toy_dataset();
    std::string reference;
    for (int jobs : {1, 1, 4}) {
        fixture::MockGateway gw(128);
        auto items = corpus.items;
        VectorIndex index(128);
        AugmentOptions o;
        o.jobs = jobs;
        build_item_index(items, *gw, index, o);
        const auto bytes = index.serialize();
        if (reference.empty()) reference = bytes;
        CHECK(bytes == reference);
    }
}

TEST_CASE("every item ends with an embedding and augmented text") {
    const auto corpus = fixture::toy_dataset();
    fixture::MockGateway gw(64);
    gw.mock->fail_generation = [](const GenerationRequest& r) { return mentions(r, "(199"); };
    auto items = corpus.items;
    VectorIndex index(64);
    const auto report = build_item_index(items, *gw, index);
    CHECK(report.succeeded + report.degraded == items.size());
    CHECK(report.degraded > 0);
    for (const auto& [id, item] : items) {
        REQUIRE(item.embedding);
        CHECK(is_unit(*item.embedding));
        REQUIRE(item.augmented_text);
        CHECK(item.augmented_text->rfind(text::serialize_metadata(item.raw_metadata), 0) == 0);
        CHECK(index.contains(Scope::items(), id));
    }
}

TEST_CASE("resume reads cached descriptions without calling the model") {
    fixture::TempDir dir("augment");
    auto items = catalog();
    {
        fixture::MockGateway gw(32);
        VectorIndex index(32);
        AugmentOptions o;
        o.cache_dir = dir.str("cache");
        build_item_index(items, *gw, index, o);
    }
    fixture::MockGateway gw(32);
    gw.mock->fail_generation = [](const GenerationRequest&) { return true; };
    auto fresh = catalog();
    VectorIndex index(32);
    AugmentOptions o;
    o.cache_dir = dir.str("cache");
    o.resume = true;
    const auto report = build_item_index(fresh, *gw, index, o);
    CHECK(report.cached == 3);
    CHECK(gw.mock->calls(TemplateName::item) == 0);
    CHECK(fresh == items);

    auto edited = catalog();
    edited.at("3").raw_metadata["title"] = "Heat (1986)";
    CHECK(augmentation_cache_key(edited.at("3"), gw->prompt(TemplateName::item)) !=
          augmentation_cache_key(items.at("3"), gw->prompt(TemplateName::item)));
}

}  // TEST_SUITE
