#include <doctest.h>

#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "fixtures.hpp"
#include "motivrec/parallel.hpp"
#include "motivrec/serialize.hpp"

using namespace motivrec;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run invoke(const std::string& workdir, std::vector<std::string> args, int jobs = 1) {
    std::vector<std::string> full{"-w", workdir, "-j", std::to_string(jobs)};
    full.insert(full.end(), args.begin(), args.end());
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(full, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

const std::vector<std::vector<std::string>>& stages() {
    static const std::vector<std::vector<std::string>> s = {
        {"ingest", "--synthetic", "--synthetic-users", "30", "--synthetic-items", "40"},
        {"augment"},
        {"annotate"},
        {"recommend"},
        {"evaluate"},
        {"ablate"},
    };
    return s;
}

void run_all(const std::string& workdir, int jobs = 1) {
    for (const auto& stage : stages()) {
        const auto r = invoke(workdir, stage, jobs);
        INFO(stage.front() << ": " << r.err);
        REQUIRE(r.code == cli::ok);
    }
}

const std::vector<std::string> kArtifacts = {"dataset.json", "items.json", "items.idx", "annotations.jsonl",
                                             "motives.idx", "recommendations.jsonl", "report.json", "ablation.json"};

/// Mock backend that records how many calls overlap.
class CountingBackend : public MockBackend {
public:
    using MockBackend::MockBackend;

    std::string complete(const GenerationRequest& request, TokenUsage& usage) override {
        Guard g(*this);
        return MockBackend::complete(request, usage);
    }
    std::vector<Vector> embed(const std::vector<std::string>& texts) override {
        Guard g(*this);
        return MockBackend::embed(texts);
    }

    std::atomic<int> peak{0};

private:
    struct Guard {
        explicit Guard(CountingBackend& b) : b(b) {
            const int n = ++b.now;
            int p = b.peak.load();
            while (n > p && !b.peak.compare_exchange_weak(p, n)) {
            }
            std::this_thread::sleep_for(std::chrono::microseconds(300));
        }
        ~Guard() { --b.now; }
        CountingBackend& b;
    };
    std::atomic<int> now{0};
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("a worker count bounds both concurrent users and in-flight model calls") {
    for (int jobs : {1, 2, 3}) {
        std::atomic<int> now{0}, peak{0};
        parallel_for(24, jobs, [&](std::size_t) {
            const int n = ++now;
            int p = peak.load();
            while (n > p && !peak.compare_exchange_weak(p, n)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
            --now;
        });
        CHECK(peak.load() <= jobs);

        PipelineConfig cfg;
        auto data = fixture::toy_dataset();
        auto backend = std::make_shared<CountingBackend>(static_cast<std::size_t>(cfg.embedding_dim));
        Gateway gateway(backend, default_templates(), fixture::no_wait(), jobs, cfg.queries_per_plan);
        auto artifacts = prepare_artifacts(std::move(data), gateway, cfg, jobs);
        prime_backend(gateway, artifacts.data);
        std::vector<std::string> users;
        for (const auto& [id, u] : artifacts.data.users) users.push_back(id);
        const Engine engine(artifacts.data, artifacts.index, artifacts.store, gateway, cfg);
        const auto recs = engine.recommend_all(users, jobs);
        CHECK(recs.size() == users.size());
        CHECK(backend->peak.load() >= 1);
        CHECK(backend->peak.load() <= jobs);
    }
}


TEST_CASE("every stage runs on the toy corpus and writes its artifacts") {
    fixture::TempDir dir("cli");
    run_all(dir.str());
    for (const auto& f : kArtifacts) CHECK(std::filesystem::exists(dir.path() / f));
    const auto report = json::parse(read_file(dir.str("report.json")));
    CHECK(report.dump().find("Recall@") != std::string::npos);
    CHECK(read_file(dir.str("ablation.txt")).find("w/o Exploration") != std::string::npos);
}

TEST_CASE("a stage without its prerequisite names the missing stage") {
    fixture::TempDir dir("cli-missing");
    auto missing = [](const Run& r) {
        const auto from = r.err.substr(r.err.find('{'));
        return json::parse(from.substr(0, from.find('\n'))).at("missing_stage").get<std::string>();
    };
    const auto empty = invoke(dir.str(), {"evaluate"});
    CHECK(empty.code == cli::missing_artifact);
    CHECK(missing(empty) == "ingest");

    REQUIRE(invoke(dir.str(), stages()[0]).code == cli::ok);
    const auto r = invoke(dir.str(), {"evaluate"});
    CHECK(r.code == cli::missing_artifact);
    CHECK(missing(r) == "recommend");
    const auto a = invoke(dir.str(), {"annotate"});
    CHECK(a.code == cli::missing_artifact);
    CHECK(missing(a) == "augment");
}

TEST_CASE("bad arguments are usage errors") {
    fixture::TempDir dir("cli-usage");
    CHECK(invoke(dir.str(), {"frobnicate"}).code == cli::usage);
    CHECK(invoke(dir.str(), {"--backend", "carrier-pigeon", "ingest", "--synthetic"}).code == cli::usage);
    CHECK(invoke(dir.str(), {"ingest"}).code != cli::ok);
}

TEST_CASE("reruns and worker counts produce identical bytes") {
    fixture::TempDir a("cli-a"), b("cli-b");
    run_all(a.str(), 1);
    run_all(b.str(), 4);
    for (const auto& f : kArtifacts) {
        INFO(f);
        CHECK(read_file(a.str(f)) == read_file(b.str(f)));
    }
    const auto before = read_file(a.str("recommendations.jsonl"));
    REQUIRE(invoke(a.str(), {"recommend"}).code == cli::ok);
    CHECK(read_file(a.str("recommendations.jsonl")) == before);
}

TEST_CASE("single-user requests keep the request in the plan") {
    fixture::TempDir dir("cli-user");
    for (std::size_t i = 0; i < 3; ++i) REQUIRE(invoke(dir.str(), stages()[i]).code == cli::ok);
    const auto dataset = json::parse(read_file(dir.str("dataset.json")));
    const auto r = invoke(dir.str(), {"recommend", "-u", "3", "-q", "war drama"});
    REQUIRE(r.code == cli::ok);
    const auto records = read_jsonl(dir.str("requests.jsonl"));
    REQUIRE(records.size() == 1);
    const auto rec = recommendation_from_json(records[0]);
    CHECK(rec.user_id == "3");
    REQUIRE(rec.request);
    CHECK(plan_covers_request(rec.plan.queries, "war drama"));
    CHECK_FALSE(std::filesystem::exists(dir.path() / "recommendations.jsonl"));
    CHECK(r.err.find("config fingerprint") != std::string::npos);
}

TEST_CASE("resume serves item descriptions from the cache") {
    fixture::TempDir dir("cli-resume");
    REQUIRE(invoke(dir.str(), stages()[0]).code == cli::ok);
    REQUIRE(invoke(dir.str(), {"augment"}).code == cli::ok);
    const auto items = read_file(dir.str("items.json"));
    const auto r = invoke(dir.str(), {"--resume", "augment"});
    REQUIRE(r.code == cli::ok);
    CHECK(read_file(dir.str("items.json")) == items);
}

}  // TEST_SUITE
