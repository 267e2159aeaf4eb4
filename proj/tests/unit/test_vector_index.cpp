#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "motivrec/error.hpp"
#include "motivrec/vector_index.hpp"
#include "oracles.hpp"

using namespace motivrec;

namespace {

struct Populated {
    VectorIndex index;
    std::vector<oracle::Entry> items;
    std::map<std::string, std::vector<oracle::Entry>> motives;
};

Populated populate(std::uint64_t seed, std::size_t dim, int n_items, int n_users, int per_user) {
    std::mt19937_64 rng(seed);
    Populated p{VectorIndex(dim), {}, {}};
    for (int i = 0; i < n_items; ++i) {
        const std::string key = "i" + std::to_string(i);
        auto v = oracle::random_unit(rng, dim);
        p.items.emplace_back(key, v);
        p.index.add_item(key, v);
    }
    for (int u = 0; u < n_users; ++u) {
        const std::string user = "u" + std::to_string(u);
        for (int m = 0; m < per_user; ++m) {
            const std::string key = motive_key(user, m + 1);
            auto v = oracle::random_unit(rng, dim);
            p.motives[user].emplace_back(key, v);
            p.index.add_motive(user, key, v);
        }
    }
    return p;
}

std::vector<std::string> keys_of(const std::vector<ScoredKey>& scored) {
    std::vector<std::string> out;
    for (const auto& s : scored) out.push_back(s.key);
    return out;
}

}  // namespace

TEST_SUITE("embedding-index") {

TEST_CASE("top_k matches an exhaustive scan") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        auto p = populate(100 + trial, 16, 80, 3, 4);
        const auto q = oracle::random_unit(rng, 16);
        const std::size_t k = 1 + rng() % 30;
        std::set<std::string> exclude;
        for (int e = 0; e < 5; ++e) exclude.insert("i" + std::to_string(rng() % 80));
        const auto got = p.index.top_k(Scope::items(), q, k, exclude);
        const auto want = oracle::top_k(p.items, q, k, exclude);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].key == want[i].first);
            CHECK(got[i].score == doctest::Approx(want[i].second).epsilon(1e-12));
        }
    }
}

TEST_CASE("top_k over the whole namespace is a full sort") {
    auto p = populate(6, 16, 64, 0, 0);
    std::mt19937_64 rng(6);
    const auto q = oracle::random_unit(rng, 16);
    const auto all = p.index.top_k(Scope::items(), q, 64);
    REQUIRE(all.size() == 64);
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].score >= all[i].score);
    for (std::size_t k = 1; k <= 64; ++k) {
        const auto prefix = p.index.top_k(Scope::items(), q, k);
        CHECK(prefix == std::vector<ScoredKey>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k)));
    }
}

TEST_CASE("exact ties resolve by ascending key") {
    VectorIndex index(2);
    for (const char* k : {"c", "a", "b"}) index.add_item(k, {1.0, 0.0});
    index.add_item("z", {0.0, 1.0});
    CHECK(keys_of(index.top_k(Scope::items(), {1.0, 0.0}, 3)) == std::vector<std::string>{"a", "b", "c"});
    CHECK(keys_of(index.top_k(Scope::items(), {1.0, 0.0}, 10)).back() == "z");
}

TEST_CASE("top_k reproduces after a permuted build") {
    auto p = populate(5, 12, 50, 0, 0);
    auto shuffled = p.items;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(9));
    VectorIndex other(12);
    for (const auto& [k, v] : shuffled) other.add_item(k, v);
    CHECK(other == p.index);
    std::mt19937_64 rng(2);
    const auto q = oracle::random_unit(rng, 12);
    CHECK(other.top_k(Scope::items(), q, 20) == p.index.top_k(Scope::items(), q, 20));
}

TEST_CASE("top_k is invariant to a positive rescaling of the query") {
    auto p = populate(8, 10, 60, 0, 0);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        const auto q = oracle::random_unit(rng, 10);
        Vector scaled = q;
        for (double& x : scaled) x *= 7.5;
        CHECK(keys_of(p.index.top_k(Scope::items(), q, 15)) == keys_of(p.index.top_k(Scope::items(), scaled, 15)));
        CHECK(keys_of(p.index.top_k(Scope::items(), q, 15)) ==
              keys_of(p.index.top_k(Scope::items(), normalized(scaled), 15)));
    }
}

TEST_CASE("mmr matches the recomputing oracle") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        auto p = populate(200 + trial, 8, 40, 0, 0);
        const auto q = oracle::random_unit(rng, 8);
        std::set<std::string> seeds;
        const int n_seeds = static_cast<int>(rng() % 4);
        for (int s = 0; s < n_seeds; ++s) seeds.insert("i" + std::to_string(rng() % 40));
        const double lambda = static_cast<double>(rng() % 11) / 10.0;
        const std::size_t k = 1 + rng() % 12;
        CHECK(p.index.mmr_select(Scope::items(), q, seeds, k, lambda) == oracle::mmr(p.items, q, seeds, k, lambda));
    }
}

TEST_CASE("mmr with lambda 1 and no seeds is top_k") {
    auto p = populate(12, 8, 50, 0, 0);
    std::mt19937_64 rng(12);
    for (int t = 0; t < 20; ++t) {
        const auto q = oracle::random_unit(rng, 8);
        CHECK(p.index.mmr_select(Scope::items(), q, {}, 10, 1.0) == keys_of(p.index.top_k(Scope::items(), q, 10)));
    }
}

TEST_CASE("mmr never returns seeds, exclusions or duplicates") {
    auto p = populate(13, 6, 30, 0, 0);
    std::mt19937_64 rng(13);
    const std::set<std::string> seeds{"i1", "i2", "i3"};
    const std::set<std::string> exclude{"i4", "i5"};
    for (int t = 0; t < 20; ++t) {
        const auto q = oracle::random_unit(rng, 6);
        const auto got = p.index.mmr_select(Scope::items(), q, seeds, 40, 0.4, exclude);
        CHECK(got.size() == 25);
        std::set<std::string> unique(got.begin(), got.end());
        CHECK(unique.size() == got.size());
        for (const auto& k : got) {
            CHECK_FALSE(seeds.contains(k));
            CHECK_FALSE(exclude.contains(k));
        }
    }
    CHECK_THROWS_AS(p.index.mmr_select(Scope::items(), {1, 0, 0, 0, 0, 0}, {"missing"}, 3, 0.5), InputError);
    CHECK_THROWS_AS(p.index.mmr_select(Scope::items(), {1, 0, 0, 0, 0, 0}, {}, 3, 1.5), InputError);
}

TEST_CASE("global motives are the union of the per-user namespaces") {
    auto p = populate(14, 8, 5, 6, 3);
    std::set<std::string> union_keys;
    for (const auto& user : p.index.users()) {
        for (const auto& k : p.index.keys(Scope::user_motives(user))) {
            union_keys.insert(k);
            CHECK(p.index.motive_owner(k) == user);
        }
    }
    const auto global = p.index.keys(Scope::all_motives());
    CHECK(std::set<std::string>(global.begin(), global.end()) == union_keys);
    CHECK(p.index.size(Scope::all_motives()) == 18);
    CHECK(p.index.size(Scope::user_motives("u2")) == 3);
    CHECK(p.index.size(Scope::user_motives("nobody")) == 0);

    std::mt19937_64 rng(14);
    const auto q = oracle::random_unit(rng, 8);
    const auto mine = p.index.top_k(Scope::user_motives("u1"), q, 10);
    for (const auto& s : mine) CHECK(p.index.motive_owner(s.key) == "u1");
    const auto want = oracle::top_k(p.motives["u1"], q, 10);
    REQUIRE(mine.size() == want.size());
    for (std::size_t i = 0; i < mine.size(); ++i) CHECK(mine[i].key == want[i].first);

    p.index.clear_motives();
    CHECK(p.index.size(Scope::all_motives()) == 0);
    CHECK(p.index.size(Scope::items()) == 5);
}

TEST_CASE("index rejects malformed input") {
    VectorIndex index(3);
    CHECK_THROWS_AS(index.add_item("a", {1.0, 0.0}), DimensionError);
    CHECK_THROWS_AS(index.add_item("a", {1.0, 1.0, 0.0}), InputError);
    index.add_item("a", {1.0, 0.0, 0.0});
    CHECK_THROWS_AS(index.add_item("a", {0.0, 1.0, 0.0}), InputError);
    CHECK_THROWS_AS(index.top_k(Scope::items(), {1.0, 0.0}, 1), DimensionError);
    CHECK_THROWS_AS(index.top_k(Scope::items(), {1.0, 0.0, 0.0}, 0), InputError);
    CHECK(index.top_k(Scope::items(), {1.0, 0.0, 0.0}, 5).size() == 1);
}

TEST_CASE("serialization round-trips and is byte-stable") {
    auto p = populate(15, 9, 20, 4, 2);
    const auto bytes = p.index.serialize();
    const auto back = VectorIndex::deserialize(bytes);
    CHECK(back == p.index);
    CHECK(back.serialize() == bytes);

    fixture::TempDir dir("index");
    p.index.save(dir.str("x.idx"));
    CHECK(VectorIndex::load(dir.str("x.idx")) == p.index);

    CHECK_THROWS_AS(VectorIndex::deserialize("garbage"), InputError);
    CHECK_THROWS_AS(VectorIndex::deserialize(bytes.substr(0, bytes.size() - 3)), InputError);
    CHECK_THROWS_AS(VectorIndex::deserialize(bytes + "x"), InputError);
}

TEST_CASE("mean direction") {
    const Vector a{1.0, 0.0}, b{0.0, 1.0}, c{-1.0, 0.0};
    const auto m = mean_direction({&a, &b});
    CHECK(m[0] == doctest::Approx(std::sqrt(0.5)));
    CHECK(m[1] == doctest::Approx(std::sqrt(0.5)));
    CHECK(mean_direction({&a, &c}) == a);
    CHECK(mean_direction({}).empty());
}

}  // TEST_SUITE
