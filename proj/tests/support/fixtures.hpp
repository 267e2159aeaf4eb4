#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "motivrec/corpus.hpp"
#include "motivrec/gateway.hpp"
#include "motivrec/pipeline.hpp"
#include "motivrec/synthetic.hpp"

namespace fixture {

using namespace motivrec;

inline RetryPolicy no_wait() {
    RetryPolicy r;
    r.sleep = [](double) {};
    return r;
}

struct MockGateway {
    std::shared_ptr<MockBackend> mock;
    std::unique_ptr<Gateway> gateway;

    explicit MockGateway(std::size_t dim = 256, int in_flight = 4, int max_queries = 4)
        : mock(std::make_shared<MockBackend>(dim)),
          gateway(std::make_unique<Gateway>(mock, default_templates(), no_wait(), in_flight, max_queries)) {}

    Gateway& operator*() { return *gateway; }
    Gateway* operator->() { return gateway.get(); }
};

inline DatasetBundle toy_dataset(std::uint64_t seed = 7, int users = 40, int items = 60) {
    SyntheticSpec spec;
    spec.users = users;
    spec.items = items;
    spec.seed = seed;
    auto corpus = make_synthetic(spec);
    auto filtered = apply_core_filter(corpus.events, 5, 3.0);
    return assemble_dataset(chronological_split(std::move(filtered)), corpus.items, corpus.users);
}

struct Toy {
    MockGateway gw;
    PipelineConfig cfg;
    Artifacts artifacts;
};

inline std::unique_ptr<Toy> toy(std::uint64_t seed = 7, PipelineConfig cfg = {}, int users = 40, int items = 60) {
    auto t = std::unique_ptr<Toy>(new Toy{MockGateway(static_cast<std::size_t>(cfg.embedding_dim)), cfg,
                                          {DatasetBundle{}, VectorIndex(), {}, {}, {}, {}}});
    t->artifacts = prepare_artifacts(toy_dataset(seed, users, items), *t->gw, cfg);
    return t;
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("motivrec-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& leaf = {}) const { return leaf.empty() ? path_.string() : (path_ / leaf).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace fixture
