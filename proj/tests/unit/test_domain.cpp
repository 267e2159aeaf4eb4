#include <doctest.h>

#include <algorithm>
#include <random>

#include "motivrec/config.hpp"
#include "motivrec/error.hpp"
#include "motivrec/serialize.hpp"
#include "motivrec/text.hpp"
#include "motivrec/types.hpp"

using namespace motivrec;

TEST_SUITE("domain-model") {

TEST_CASE("split tags round-trip through their names") {
    for (auto tag : {SplitTag::unassigned, SplitTag::train, SplitTag::valid, SplitTag::test}) {
        CHECK(split_tag_from_string(to_string(tag)) == tag);
    }
    CHECK_THROWS_AS(split_tag_from_string("holdout"), InputError);
}

TEST_CASE("vector helpers") {
    const Vector v = normalized({3.0, 4.0});
    CHECK(v[0] == doctest::Approx(0.6));
    CHECK(v[1] == doctest::Approx(0.8));
    CHECK(is_unit(v));
    CHECK_FALSE(is_unit({1.0, 1.0}));
    CHECK(l2_norm({3.0, 4.0}) == 5.0);
    CHECK_THROWS_AS(dot({1.0}, {1.0, 0.0}), DimensionError);
    CHECK(motive_key("u1", 3) == "u1#3");
}

TEST_CASE("domain types survive a JSON round trip") {
    ItemRecord item{"i1", {{"title", "Alien"}, {"genres", "Sci-Fi|Horror"}}, "dark, Sci-Fi", "title: Alien\n\ndark",
                    normalized({1.0, 2.0, 2.0}), 7};
    CHECK(json(item).get<ItemRecord>() == item);
    ItemRecord bare{"i2", {{"title", "Heat"}}, std::nullopt, std::nullopt, std::nullopt, 0};
    CHECK(json(bare).get<ItemRecord>() == bare);

    InteractionEvent rated{"u1", "i1", 4.5, 978300760, SplitTag::valid};
    InteractionEvent unrated{"u1", "i2", std::nullopt, 0, SplitTag::train};
    CHECK(json(rated).get<InteractionEvent>() == rated);
    CHECK(json(unrated).get<InteractionEvent>() == unrated);

    UserRecord user{"u1", {{"age", "25-34"}}, {unrated, rated}};
    CHECK(json(user).get<UserRecord>() == user);

    MotiveAnnotation motive{"u1", 2, {"i1", "i2"}, "late-night Sci-Fi", normalized({0.0, 1.0, 1.0}), {10, 20}};
    CHECK(json(motive).get<MotiveAnnotation>() == motive);
    CHECK(motive.key() == "u1#2");

    PipelineConfig cfg;
    cfg.mmr_lambda = 0.3;
    cfg.min_rating.reset();
    cfg.ablation.exploration_on = false;
    CHECK(json(cfg).get<PipelineConfig>() == cfg);
}

TEST_CASE("random domain values round-trip") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 0; n < 100; ++n) {
        Vector v(5);
        for (auto& x : v) x = u(rng);
        ItemRecord item{"item-" + std::to_string(n), {{"title", "T" + std::to_string(rng())}}, std::nullopt,
                        std::nullopt, normalized(v), static_cast<std::int64_t>(rng() % 1000)};
        if (n % 2) {
            item.description = "d" + std::to_string(n);
            item.augmented_text = text::augment(item.raw_metadata, *item.description);
        }
        REQUIRE(json::parse(json(item).dump()).get<ItemRecord>() == item);
        MotiveAnnotation m{"u" + std::to_string(n), n + 1, {item.item_id}, "m", normalized(v),
                           {static_cast<std::int64_t>(n), static_cast<std::int64_t>(n + 5)}};
        REQUIRE(json::parse(json(m).dump()).get<MotiveAnnotation>() == m);
    }
}

TEST_CASE("history order is total: any permutation sorts to the same sequence") {
    std::vector<InteractionEvent> events;
    for (int i = 0; i < 12; ++i) {
        events.push_back({"u", "i" + std::to_string(i % 5) + std::to_string(i), 3.0, 100 + (i % 4), SplitTag::train});
    }
    auto reference = events;
    std::sort(reference.begin(), reference.end(), history_before);
    std::mt19937_64 rng(3);
    for (int p = 0; p < 50; ++p) {
        std::shuffle(events.begin(), events.end(), rng);
        auto sorted = events;
        std::sort(sorted.begin(), sorted.end(), history_before);
        REQUIRE(sorted == reference);
    }
    InteractionEvent a{"u", "a", {}, 5, SplitTag::train};
    InteractionEvent b{"u", "b", {}, 5, SplitTag::train};
    CHECK(history_before(a, b));
    CHECK_FALSE(history_before(b, a));
}

TEST_CASE("validate_config accepts the defaults") {
    PipelineConfig cfg;
    cfg.mmr_lambda = 0.5;
    cfg.reflection_threshold = 0.8;
    cfg.max_reflections = 2;
    CHECK(&validate_config(cfg) == &cfg);
    CHECK(check_config(cfg).ok());
}

TEST_CASE("validate_config names every violated field") {
    PipelineConfig cfg;
    cfg.mmr_lambda = 1.3;
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("mmr_lambda"), ConfigError);

    cfg = {};
    cfg.top_k_eval = {10, 10};
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("strictly increasing"), ConfigError);

    cfg = {};
    cfg.mmr_lambda = -0.1;
    cfg.rrf_constant = 0.0;
    cfg.reflection_threshold = 2.0;
    cfg.k_exploit = 0;
    const auto report = check_config(cfg);
    CHECK(report.errors.size() == 4);
    try {
        validate_config(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        for (const char* field : {"mmr_lambda", "rrf_constant", "reflection_threshold", "k_exploit"}) {
            CHECK(msg.find(field) != std::string::npos);
        }
    }
}

TEST_CASE("reflection on with no budget is a warning") {
    PipelineConfig cfg;
    cfg.max_reflections = 0;
    std::vector<std::string> warnings;
    CHECK_NOTHROW(validate_config(cfg, &warnings));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("max_reflections") != std::string::npos);
}

TEST_CASE("config text parses with defaults for absent keys") {
    const auto cfg = parse_config("mmr_lambda = 0.25\ntop_k_eval = 1, 3\nmin_rating = none\n[ablation]\nreflection_on = false\n");
    CHECK(cfg.mmr_lambda == 0.25);
    CHECK(cfg.top_k_eval == std::vector<int>{1, 3});
    CHECK_FALSE(cfg.min_rating.has_value());
    CHECK_FALSE(cfg.ablation.reflection_on);
    CHECK(cfg.ablation.annotation_on);
    CHECK(cfg.k_exploit == PipelineConfig{}.k_exploit);

    CHECK_THROWS_AS(parse_config("k_exploit = three\n"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("mystery_knob = 1\n"), doctest::Contains("mystery_knob"), ConfigError);
}

TEST_CASE("format_config is a fixed point of parse_config") {
    PipelineConfig cfg;
    cfg.mmr_lambda = 0.1;
    cfg.rrf_constant = 42.5;
    cfg.top_k_eval = {1, 2, 50};
    cfg.ablation.annotation_on = false;
    const auto text = format_config(cfg);
    CHECK(parse_config(text) == cfg);
    CHECK(format_config(parse_config(text)) == text);
    CHECK(config_fingerprint(cfg) == config_fingerprint(parse_config(text)));
    CHECK(config_fingerprint(cfg) != config_fingerprint(PipelineConfig{}));
}

}  // TEST_SUITE

TEST_SUITE("text") {

TEST_CASE("tokenizer keeps hyphens and apostrophes and drops stopwords") {
    const auto toks = text::tokenize("The Sci-Fi of Ocean's Eleven, and a WAR drama!");
    std::vector<std::string> norms, surfaces;
    for (const auto& t : toks) {
        norms.push_back(t.norm);
        surfaces.push_back(t.surface);
    }
    CHECK(norms == std::vector<std::string>{"sci-fi", "ocean's", "eleven", "war", "drama"});
    CHECK(surfaces == std::vector<std::string>{"Sci-Fi", "Ocean's", "Eleven", "WAR", "drama"});
    CHECK(text::is_stopword("the"));
    CHECK_FALSE(text::is_stopword("war"));
}

TEST_CASE("metadata serialization is key ordered and prefixes the augmented text") {
    const Metadata m{{"title", "Alien"}, {"genres", "Sci-Fi|Horror"}};
    CHECK(text::serialize_metadata(m) == "genres: Sci-Fi|Horror\ntitle: Alien");
    const auto augmented = text::augment(m, "A tense Sci-Fi Horror.");
    CHECK(augmented == "genres: Sci-Fi|Horror\ntitle: Alien\n\nA tense Sci-Fi Horror.");
    CHECK(augmented.rfind(text::serialize_metadata(m), 0) == 0);
    CHECK(text::metadata_values(text::serialize_metadata(m)) == "Sci-Fi|Horror\nAlien");
}

TEST_CASE("string helpers") {
    CHECK(text::truncate_words("one two three", 7) == "one two");
    CHECK(text::truncate_words("short", 64) == "short");
    CHECK(text::truncate_words("abcdefghij", 4).size() <= 4);
    CHECK(text::trim("  x y \n") == "x y");
    CHECK(text::split_lines("a\r\nb\n") == std::vector<std::string>{"a", "b"});
    CHECK(text::hex64(0xabcULL) == "0000000000000abc");
    CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

}  // TEST_SUITE
