#include <benchmark/benchmark.h>

#include <random>

#include "motivrec/eval.hpp"
#include "motivrec/searcher.hpp"
#include "motivrec/vector_index.hpp"

using namespace motivrec;

namespace {

constexpr std::size_t kDim = 64;

Vector random_vector(std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    Vector v(kDim);
    for (auto& x : v) x = d(rng);
    return normalized(std::move(v));
}

VectorIndex item_index(std::size_t n) {
    std::mt19937_64 rng(1);
    VectorIndex index(kDim);
    for (std::size_t i = 0; i < n; ++i) index.add_item("i" + std::to_string(i), random_vector(rng));
    return index;
}

void BM_TopK(benchmark::State& state) {
    const auto index = item_index(static_cast<std::size_t>(state.range(0)));
    std::mt19937_64 rng(2);
    const auto q = random_vector(rng);
    for (auto _ : state) benchmark::DoNotOptimize(index.top_k(Scope::items(), q, 20));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TopK)->Arg(1000)->Arg(4000)->Arg(16000);

void BM_Mmr(benchmark::State& state) {
    const auto index = item_index(static_cast<std::size_t>(state.range(0)));
    std::mt19937_64 rng(3);
    const auto q = random_vector(rng);
    for (auto _ : state) benchmark::DoNotOptimize(index.mmr_select(Scope::items(), q, {"i0", "i1"}, 5, 0.5));
}
BENCHMARK(BM_Mmr)->Arg(200)->Arg(1000)->Arg(4000);

void BM_RrfFuse(benchmark::State& state) {
    std::mt19937_64 rng(4);
    std::vector<std::vector<std::string>> lists(static_cast<std::size_t>(state.range(0)));
    for (auto& l : lists) {
        for (int i = 0; i < 100; ++i) l.push_back("i" + std::to_string(rng() % 500));
    }
    for (auto _ : state) benchmark::DoNotOptimize(rrf_fuse(lists, 60.0));
}
BENCHMARK(BM_RrfFuse)->Arg(2)->Arg(4)->Arg(8);

void BM_Metrics(benchmark::State& state) {
    const int users = static_cast<int>(state.range(0));
    std::mt19937_64 rng(5);
    std::map<std::string, ItemRecord> items;
    for (int i = 0; i < 2000; ++i) {
        const std::string id = "i" + std::to_string(i);
        items[id] = ItemRecord{id, {{"title", id}}, std::nullopt, std::nullopt, std::nullopt, i % 97};
    }
    RecommendationLists recs;
    std::map<std::string, std::set<std::string>> rel;
    for (int u = 0; u < users; ++u) {
        const std::string user = "u" + std::to_string(u);
        for (int i = 0; i < 50; ++i) recs[user].push_back("i" + std::to_string(rng() % 2000));
        for (int i = 0; i < 5; ++i) rel[user].insert("i" + std::to_string(rng() % 2000));
    }
    const RelevanceSets relevance{rel, 0};
    for (auto _ : state) benchmark::DoNotOptimize(metrics_at_k(recs, relevance, items, {5, 10, 20, 50}));
}
BENCHMARK(BM_Metrics)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
