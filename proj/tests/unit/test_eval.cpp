#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "motivrec/error.hpp"
#include "motivrec/eval.hpp"
#include "oracles.hpp"

using namespace motivrec;

namespace {

std::map<std::string, ItemRecord> catalog(int n) {
    std::map<std::string, ItemRecord> items;
    for (int i = 0; i < n; ++i) {
        const std::string id = "i" + std::to_string(i);
        items[id] = ItemRecord{id, {{"title", id}}, std::nullopt, std::nullopt, std::nullopt, i};
    }
    return items;
}

RelevanceSets relevance(std::map<std::string, std::set<std::string>> by_user) {
    return RelevanceSets{std::move(by_user), 0};
}

std::map<std::string, std::int64_t> popularity_of(const std::map<std::string, ItemRecord>& items) {
    std::map<std::string, std::int64_t> pop;
    for (const auto& [id, item] : items) pop[id] = item.popularity;
    return pop;
}

}  // namespace

TEST_SUITE("eval-harness") {

TEST_CASE("closed-form values for a single user") {
    const auto items = catalog(10);
    const auto rel = relevance({{"u", {"i1", "i2"}}});
    const RecommendationLists recs{{"u", {"i1", "i5", "i2"}}};
    const auto r = metrics_at_k(recs, rel, items, {1, 3});
    CHECK(r.at("Recall", 1) == doctest::Approx(0.5));
    CHECK(r.at("Recall", 3) == doctest::Approx(1.0));
    CHECK(r.at("nDCG", 1) == doctest::Approx(1.0));
    CHECK(r.at("nDCG", 3) == doctest::Approx((1.0 + 0.5) / (1.0 + 1.0 / std::log2(3.0))));
    CHECK(r.at("MRR", 3) == doctest::Approx(1.0));
    CHECK(r.at("Coverage", 1) == doctest::Approx(0.1));
    CHECK(r.at("Coverage", 3) == doctest::Approx(0.3));
    CHECK(r.at("Pop", 1) == doctest::Approx(1.0));
    CHECK(r.at("Pop", 3) == doctest::Approx((1.0 + 5.0 + 2.0) / 3.0));
    CHECK(r.users_evaluated == 1);

    const RecommendationLists late{{"u", {"i7", "i8", "i2"}}};
    const auto l = metrics_at_k(late, rel, items, {3});
    CHECK(l.at("MRR", 3) == doctest::Approx(1.0 / 3.0));
    CHECK(l.at("nDCG", 3) == doctest::Approx(0.5 / (1.0 + 1.0 / std::log2(3.0))));
}

TEST_CASE("a user without recommendations scores zero") {
    const auto items = catalog(5);
    const auto rel = relevance({{"u", {"i1"}}, {"v", {"i2"}}});
    const auto r = metrics_at_k({{"u", {"i1"}}}, rel, items, {5});
    CHECK(r.at("Recall", 5) == doctest::Approx(0.5));
    CHECK(r.per_user.at("v").at("Recall@5") == 0.0);
    CHECK(r.at("Pop", 5) == doctest::Approx(1.0));
}

TEST_CASE("metrics match the reference computation on random lists") {
    const auto data = fixture::toy_dataset();
    const auto rel = relevance_sets(data);
    std::vector<std::string> ids;
    for (const auto& [id, item] : data.items) ids.push_back(id);
    std::mt19937_64 rng(5);
    const auto events = data.events();
    for (int trial = 0; trial < 20; ++trial) {
        RecommendationLists recs;
        for (const auto& [user, record] : data.users) {
            auto shuffled = ids;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            shuffled.resize(rng() % 25);
            if (trial % 3 == 0) shuffled.push_back("not-in-catalog");
            recs[user] = shuffled;
        }
        const std::vector<int> cutoffs{1, 5, 10, 20};
        const auto got = metrics_at_k(recs, rel, data.items, cutoffs, 1 + trial % 3);
        for (int k : cutoffs) {
            const auto want = oracle::metrics(recs, events, popularity_of(data.items), data.items.size(), k);
            CHECK(got.at("Recall", k) == doctest::Approx(want.recall).epsilon(1e-12));
            CHECK(got.at("nDCG", k) == doctest::Approx(want.ndcg).epsilon(1e-12));
            CHECK(got.at("MRR", k) == doctest::Approx(want.mrr).epsilon(1e-12));
            CHECK(got.at("Pop", k) == doctest::Approx(want.pop).epsilon(1e-12));
            if (trial % 3 != 0) CHECK(got.at("Coverage", k) == doctest::Approx(want.coverage).epsilon(1e-12));
        }
    }
}

TEST_CASE("accuracy metrics never drop as the cutoff grows") {
    const auto data = fixture::toy_dataset();
    const auto rel = relevance_sets(data);
    std::vector<std::string> ids;
    for (const auto& [id, item] : data.items) ids.push_back(id);
    std::mt19937_64 rng(6);
    RecommendationLists recs;
    for (const auto& [user, record] : data.users) {
        auto s = ids;
        std::shuffle(s.begin(), s.end(), rng);
        recs[user] = s;
    }
    const std::vector<int> cutoffs{1, 2, 5, 10, 20, 50};
    const auto r = metrics_at_k(recs, rel, data.items, cutoffs);
    for (std::size_t i = 1; i < cutoffs.size(); ++i) {
        for (const char* m : {"Recall", "MRR", "Coverage"}) {
            CHECK(r.at(m, cutoffs[i - 1]) <= r.at(m, cutoffs[i]));
        }
    }
    for (const auto& name : metric_names()) {
        for (int k : cutoffs) {
            const double v = r.at(name, k);
            CHECK(v >= 0.0);
            if (name != "Pop") CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("nDCG is one exactly when the top slots hold relevant items") {
    const auto items = catalog(10);
    const auto rel = relevance({{"u", {"i1", "i2", "i3"}}});
    CHECK(metrics_at_k({{"u", {"i2", "i1", "i9"}}}, rel, items, {2}).at("nDCG", 2) == doctest::Approx(1.0));
    CHECK(metrics_at_k({{"u", {"i3", "i2", "i1"}}}, rel, items, {3}).at("nDCG", 3) == doctest::Approx(1.0));
    CHECK(metrics_at_k({{"u", {"i2", "i9", "i1"}}}, rel, items, {3}).at("nDCG", 3) < 1.0);
    CHECK(metrics_at_k({{"u", {"i9", "i1", "i2"}}}, rel, items, {2}).at("nDCG", 2) < 1.0);
}

TEST_CASE("a most-popular list has the highest Pop") {
    const auto data = fixture::toy_dataset();
    const auto rel = relevance_sets(data);
    std::vector<std::pair<std::int64_t, std::string>> by_pop;
    for (const auto& [id, item] : data.items) by_pop.emplace_back(-item.popularity, id);
    std::sort(by_pop.begin(), by_pop.end());
    std::vector<std::string> popular;
    for (const auto& [p, id] : by_pop) popular.push_back(id);

    std::mt19937_64 rng(8);
    RecommendationLists top, random;
    for (const auto& [user, record] : data.users) {
        top[user] = popular;
        auto s = popular;
        std::shuffle(s.begin(), s.end(), rng);
        random[user] = s;
    }
    for (int k : {1, 5, 10}) {
        const auto a = metrics_at_k(top, rel, data.items, {k});
        const auto b = metrics_at_k(random, rel, data.items, {k});
        CHECK(a.at("Pop", k) >= b.at("Pop", k));
        CHECK(a.at("Coverage", k) <= b.at("Coverage", k));
    }
}

TEST_CASE("relevance sets come from the test split") {
    const auto data = fixture::toy_dataset();
    const auto rel = relevance_sets(data);
    std::size_t n = 0;
    for (const auto& [user, set] : rel.by_user) n += set.size();
    CHECK(n > 0);
    CHECK(rel.by_user.size() + rel.users_without_test == data.users.size());
    for (const auto& e : data.events_in(SplitTag::test)) CHECK(rel.by_user.at(e.user_id).contains(e.item_id));

    DatasetBundle empty = data;
    for (auto& [id, user] : empty.users) {
        for (auto& e : user.history) {
            if (e.split == SplitTag::test) e.split = SplitTag::valid;
        }
    }
    CHECK_THROWS_AS(relevance_sets(empty), EmptyDatasetError);
}

TEST_CASE("worker count does not change the result") {
    const auto data = fixture::toy_dataset();
    const auto rel = relevance_sets(data);
    RecommendationLists recs;
    for (const auto& [user, record] : data.users) recs[user] = {data.items.begin()->first};
    const auto a = metrics_at_k(recs, rel, data.items, {1, 10}, 1);
    const auto b = metrics_at_k(recs, rel, data.items, {1, 10}, 4);
    CHECK(a.metrics == b.metrics);
    CHECK(a.per_user == b.per_user);
    CHECK(eval_to_json(a, {1, 10}) == eval_to_json(b, {1, 10}));
}

TEST_CASE("tables list every metric at every cutoff") {
    const auto items = catalog(4);
    const auto r = metrics_at_k({{"u", {"i1"}}}, relevance({{"u", {"i1"}}}), items, {1, 2});
    const auto table = format_eval_table({{"full", &r}}, {1, 2});
    for (const auto& m : metric_names()) {
        CHECK(table.find(metric_key(m, 1)) != std::string::npos);
        CHECK(table.find(metric_key(m, 2)) != std::string::npos);
    }
    CHECK(table.find("1.0000") != std::string::npos);
}

TEST_CASE("the ablation grid runs the four variants against the full model") {
    PipelineConfig cfg;
    cfg.max_reflections = 1;
    auto t = fixture::toy(7, cfg);
    prime_backend(*t->gw, t->artifacts.data);
    const auto variants = standard_variants(cfg);
    REQUIRE(variants.size() == 4);
    CHECK(variants[0].name == "full");
    CHECK_FALSE(variants[1].cfg.ablation.annotation_on);
    CHECK_FALSE(variants[2].cfg.ablation.exploration_on);
    CHECK_FALSE(variants[3].cfg.ablation.reflection_on);

    const auto report = run_ablation_grid(t->artifacts, true, *t->gw, variants);
    REQUIRE(report.rows.size() == 4);
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        REQUIRE(report.rows[i].result);
        CHECK(report.rows[i].error.empty());
        CHECK(report.rows[i].result->fingerprint == config_fingerprint(variants[i].cfg));
    }

    std::vector<std::string> users;
    for (const auto& [id, u] : t->artifacts.data.users) users.push_back(id);
    const Engine engine(t->artifacts.data, t->artifacts.index, t->artifacts.store, *t->gw, cfg);
    const auto direct = metrics_at_k(lists_from(engine.recommend_all(users, 1)), relevance_sets(t->artifacts.data),
                                     t->artifacts.data.items, cfg.top_k_eval);
    CHECK(direct.metrics == report.rows[0].result->metrics);

    const auto text = report.text();
    CHECK(text.find("w/o Reflection") != std::string::npos);
    CHECK(text.find('%') != std::string::npos);
    const auto j = report.to_json();
    CHECK(j.dump().find("per_user") == std::string::npos);
}

TEST_CASE("a failing variant is recorded and the grid continues") {
    PipelineConfig cfg;
    cfg.max_reflections = 0;
    auto t = fixture::toy(7, cfg);
    auto variants = standard_variants(cfg);
    variants[2].cfg.mmr_lambda = 2.0;
    const auto report = run_ablation_grid(t->artifacts, true, *t->gw, variants);
    REQUIRE(report.rows.size() == 4);
    CHECK_FALSE(report.rows[2].result);
    CHECK(report.rows[2].error.find("mmr_lambda") != std::string::npos);
    CHECK(report.rows[3].result);
}

}  // TEST_SUITE
