#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <memory>
#include <optional>

#include "motivrec/annotator.hpp"
#include "motivrec/augmenter.hpp"
#include "motivrec/config.hpp"
#include "motivrec/corpus.hpp"
#include "motivrec/error.hpp"
#include "motivrec/eval.hpp"
#include "motivrec/gateway.hpp"
#include "motivrec/pipeline.hpp"
#include "motivrec/serialize.hpp"
#include "motivrec/synthetic.hpp"
#include "motivrec/vector_index.hpp"

namespace motivrec::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kEnvHelp = R"(Environment (http backend):
  MOTIVREC_API_BASE     scheme://host[:port] of an OpenAI-compatible server
  MOTIVREC_API_KEY      bearer token
  MOTIVREC_CHAT_MODEL   chat model name
  MOTIVREC_EMBED_MODEL  embedding model name
  MOTIVREC_EMBED_DIM    embedding dimension
  MOTIVREC_CHAT_PATH    default /v1/chat/completions
  MOTIVREC_EMBED_PATH   default /v1/embeddings)";

struct Options {
    std::string config;
    std::string backend = "mock";
    std::string workdir = "motivrec-work";
    int jobs = 1;
    std::uint64_t seed = 0;
    bool resume = false;

    // ingest
    std::string interactions;
    std::string items;
    std::string user_meta;
    std::string format = "tsv";
    bool synthetic = false;
    int synthetic_users = 40;
    int synthetic_items = 60;

    // recommend
    std::vector<std::string> users;
    std::string query;
    std::string out;
};

struct Workdir {
    fs::path root;

    std::string dataset() const { return (root / "dataset.json").string(); }
    std::string items() const { return (root / "items.json").string(); }
    std::string item_index() const { return (root / "items.idx").string(); }
    std::string cache() const { return (root / "cache").string(); }
    std::string annotations() const { return (root / "annotations.jsonl").string(); }
    std::string annotate_meta() const { return (root / "annotate.json").string(); }
    std::string motive_index() const { return (root / "motives.idx").string(); }
    std::string recommendations() const { return (root / "recommendations.jsonl").string(); }
    std::string requests() const { return (root / "requests.jsonl").string(); }
    std::string report_text() const { return (root / "report.txt").string(); }
    std::string report_json() const { return (root / "report.json").string(); }
    std::string ablation_text() const { return (root / "ablation.txt").string(); }
    std::string ablation_json() const { return (root / "ablation.json").string(); }
};

const std::string& require(const std::string& path, const std::string& stage) {
    if (!fs::exists(path)) throw MissingArtifactError(stage, path);
    return path;
}

std::unique_ptr<Gateway> make_gateway(const Options& o, const PipelineConfig& cfg) {
    std::shared_ptr<Backend> backend;
    if (o.backend == "mock") {
        backend = std::make_shared<MockBackend>(static_cast<std::size_t>(cfg.embedding_dim));
    } else {
        auto http = HttpBackendOptions::from_env();
        if (http.base_url.empty()) throw ConfigError("MOTIVREC_API_BASE is not set");
        if (http.dimension == 0) throw ConfigError("MOTIVREC_EMBED_DIM is not set");
        backend = std::make_shared<HttpBackend>(std::move(http));
    }
    auto templates = cfg.template_dir.empty() ? default_templates() : load_templates(cfg.template_dir);
    RetryPolicy retry;
    retry.jitter_seed = o.seed;
    return std::make_unique<Gateway>(std::move(backend), std::move(templates), std::move(retry), o.jobs,
                                     cfg.queries_per_plan, cfg.max_output_tokens);
}

/// The split dataset with the augmented catalog laid over it.
DatasetBundle load_augmented(const Workdir& w) {
    auto data = load_dataset(require(w.dataset(), "ingest"));
    for (const auto& j : json::parse(read_file(require(w.items(), "augment")))) {
        auto item = j.get<ItemRecord>();
        auto it = data.items.find(item.item_id);
        if (it == data.items.end()) throw InputError("augmented item " + item.item_id + " is not in the dataset");
        it->second = std::move(item);
    }
    return data;
}

std::string dump_pretty(const json& j) { return j.dump(2) + "\n"; }

int do_ingest(const Options& o, const PipelineConfig& cfg, const Workdir& w, std::ostream& out) {
    std::vector<InteractionEvent> events;
    std::map<std::string, Metadata> item_meta;
    std::map<std::string, Metadata> user_meta;
    std::size_t rejected = 0;

    if (o.synthetic) {
        SyntheticSpec spec;
        spec.users = o.synthetic_users;
        spec.items = o.synthetic_items;
        spec.seed = o.seed;
        auto corpus = make_synthetic(spec);
        events = std::move(corpus.events);
        item_meta = std::move(corpus.items);
        user_meta = std::move(corpus.users);
    } else {
        if (o.interactions.empty()) throw ConfigError("ingest needs --interactions or --synthetic");
        const auto schema = o.format == "movielens" ? InteractionSchema::movielens() : InteractionSchema{};
        auto loaded = load_interactions(o.interactions, schema);
        rejected = loaded.rejections.size();
        for (const auto& r : loaded.rejections) out << "rejected line " << r.line << ": " << r.reason << "\n";
        events = std::move(loaded.events);
        if (!o.items.empty()) {
            item_meta = o.format == "movielens" ? load_movielens_items(o.items) : load_item_metadata(o.items);
        }
        if (!o.user_meta.empty()) user_meta = load_item_metadata(o.user_meta);
    }

    auto filtered = apply_core_filter(std::move(events), cfg.min_count, cfg.min_rating);
    auto data = assemble_dataset(chronological_split(std::move(filtered)), item_meta, user_meta);
    fs::create_directories(w.root);
    save_dataset(data, w.dataset());

    const auto stats = dataset_stats(data);
    out << "users " << stats.users << ", items " << stats.items << ", interactions " << stats.interactions
        << " (train " << stats.train << ", valid " << stats.valid << ", test " << stats.test << "), rejected rows "
        << rejected << "\n";
    return ok;
}

int do_augment(const Options& o, const PipelineConfig& cfg, const Workdir& w, std::ostream& out) {
    auto data = load_dataset(require(w.dataset(), "ingest"));
    auto gateway = make_gateway(o, cfg);
    VectorIndex index(gateway->backend().dimension());
    AugmentOptions opts{w.cache(), o.resume, o.jobs};
    const auto report = build_item_index(data.items, *gateway, index, opts);

    json items = json::array();
    for (const auto& [id, item] : data.items) items.push_back(item);
    write_file_atomic(w.items(), items.dump() + "\n");
    index.save(w.item_index());

    out << "augmented " << report.succeeded << " items (" << report.cached << " from cache), degraded "
        << report.degraded << "\n";
    for (const auto& id : report.degraded_items) out << "degraded: " << id << "\n";
    return ok;
}

int do_annotate(const Options& o, const PipelineConfig& cfg, const Workdir& w, std::ostream& out) {
    auto data = load_augmented(w);
    auto index = VectorIndex::load(require(w.item_index(), "augment"));
    auto gateway = make_gateway(o, cfg);
    prime_backend(*gateway, data);
    const auto result = build_motive_index(data, *gateway, index, cfg, o.jobs);

    save_annotations(result.motives, w.annotations());
    index.save(w.motive_index());
    write_file_atomic(w.annotate_meta(), dump_pretty({{"fingerprint", config_fingerprint(cfg)},
                                                      {"annotation_on", cfg.ablation.annotation_on}}));
    out << "annotated " << result.motives.size() << " motives for " << result.users_annotated << " users ("
        << result.users_skipped << " skipped, " << result.bundles_failed << " bundles failed)\n";
    for (const auto& n : result.notices) out << "notice: " << n << "\n";
    return ok;
}

struct Loaded {
    DatasetBundle data;
    VectorIndex index;
    std::vector<MotiveAnnotation> motives;
};

Loaded load_annotated(const Workdir& w) {
    auto data = load_augmented(w);
    auto index = VectorIndex::load(require(w.motive_index(), "annotate"));
    auto motives = load_annotations(require(w.annotations(), "annotate"));
    return {std::move(data), std::move(index), std::move(motives)};
}

int do_recommend(const Options& o, const PipelineConfig& cfg, const Workdir& w, std::ostream& out) {
    auto loaded = load_annotated(w);
    const auto store = group_by_user(loaded.motives);
    auto gateway = make_gateway(o, cfg);
    prime_backend(*gateway, loaded.data);
    const Engine engine(loaded.data, loaded.index, store, *gateway, cfg);

    std::vector<std::string> users = o.users;
    if (users.empty()) {
        for (const auto& [id, rec] : loaded.data.users) users.push_back(id);
    }
    const std::optional<std::string> request = o.query.empty() ? std::nullopt : std::optional<std::string>(o.query);
    const auto recs = engine.recommend_all(users, o.jobs, request);

    std::vector<json> lines;
    std::size_t failed = 0;
    for (const auto& r : recs) {
        lines.push_back(recommendation_to_json(r));
        if (r.error) ++failed;
    }
    std::string path = o.out;
    if (path.empty()) path = o.users.empty() ? w.recommendations() : w.requests();
    write_file_atomic(path, to_jsonl(lines));
    if (!o.users.empty()) out << to_jsonl(lines);
    out << "recommended for " << recs.size() << " users (" << failed << " without a plan) -> " << path << "\n";
    return ok;
}

int do_evaluate(const Options& o, const PipelineConfig& cfg, const Workdir& w, std::ostream& out) {
    const auto data = load_dataset(require(w.dataset(), "ingest"));
    std::vector<Recommendation> recs;
    for (const auto& j : read_jsonl(require(o.out.empty() ? w.recommendations() : o.out, "recommend"))) {
        recs.push_back(recommendation_from_json(j));
    }
    auto result = metrics_at_k(lists_from(recs), relevance_sets(data), data.items, cfg.top_k_eval, o.jobs);
    result.fingerprint = config_fingerprint(cfg);

    std::string text = format_eval_table({{"motivrec", &result}}, cfg.top_k_eval);
    text += "users evaluated " + std::to_string(result.users_evaluated) + ", without test items " +
            std::to_string(result.users_without_test) + ", config " + result.fingerprint + "\n";
    write_file_atomic(w.report_text(), text);
    write_file_atomic(w.report_json(), dump_pretty(eval_to_json(result, cfg.top_k_eval)));
    out << text;
    return ok;
}

int do_ablate(const Options& o, const PipelineConfig& cfg, const Workdir& w, std::ostream& out) {
    auto loaded = load_annotated(w);
    const auto meta = json::parse(read_file(require(w.annotate_meta(), "annotate")));
    Artifacts artifacts{std::move(loaded.data), std::move(loaded.index), std::move(loaded.motives), {}, {}, {}};
    artifacts.store = group_by_user(artifacts.motives);
    auto gateway = make_gateway(o, cfg);
    prime_backend(*gateway, artifacts.data);

    const auto report = run_ablation_grid(artifacts, meta.at("annotation_on").get<bool>(), *gateway,
                                          standard_variants(cfg), o.jobs);
    const auto text = report.text();
    write_file_atomic(w.ablation_text(), text);
    write_file_atomic(w.ablation_json(), dump_pretty(report.to_json()));
    out << text;
    for (const auto& row : report.rows) {
        if (!row.result) return failure;
    }
    return ok;
}

std::string error_json(const std::string& kind, const std::string& message, const std::string& stage = {}) {
    json j{{"error", kind}, {"message", message}};
    if (!stage.empty()) j["missing_stage"] = stage;
    return j.dump();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Motive-driven recommendation pipeline with staged, resumable artifacts.", "motivrec"};
    app.footer(kEnvHelp);
    app.require_subcommand(1, 1);
    app.add_option("--config", o.config, "Pipeline config file (INI)")->check(CLI::ExistingFile);
    app.add_option("--backend", o.backend, "Model backend")->check(CLI::IsMember({"mock", "http"}))->capture_default_str();
    app.add_option("--jobs,-j", o.jobs, "Concurrent users and in-flight model requests")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();
    app.add_option("--seed", o.seed, "Seed for synthetic data and retry jitter")->capture_default_str();
    app.add_flag("--resume", o.resume, "Reuse cached item descriptions");
    app.add_option("--workdir,-w", o.workdir, "Directory holding stage artifacts")->capture_default_str();

    auto* ingest = app.add_subcommand("ingest", "Load, filter and split interactions into dataset.json");
    ingest->add_option("--interactions", o.interactions, "Interaction file")->check(CLI::ExistingFile);
    ingest->add_option("--items", o.items, "Item metadata (JSONL, or movies.dat with --format movielens)")
        ->check(CLI::ExistingFile);
    ingest->add_option("--user-meta", o.user_meta, "User metadata JSONL keyed by user_id")->check(CLI::ExistingFile);
    ingest->add_option("--format", o.format, "Interaction layout")
        ->check(CLI::IsMember({"tsv", "movielens"}))
        ->capture_default_str();
    ingest->add_flag("--synthetic", o.synthetic, "Generate a seeded toy corpus instead of reading files");
    ingest->add_option("--synthetic-users", o.synthetic_users, "Users in the toy corpus")->capture_default_str();
    ingest->add_option("--synthetic-items", o.synthetic_items, "Items in the toy corpus")->capture_default_str();

    auto* augment = app.add_subcommand("augment", "Describe and embed every item");
    auto* annotate = app.add_subcommand("annotate", "Infer and embed user motives");
    auto* recommend = app.add_subcommand("recommend", "Produce ranked lists with audit records");
    recommend->add_option("--user,-u", o.users, "Restrict to these users (repeatable)");
    recommend->add_option("--query,-q", o.query, "Explicit request applied to every user");
    recommend->add_option("--out", o.out, "Output file (default <workdir>/recommendations.jsonl, or requests.jsonl with --user)");
    auto* evaluate = app.add_subcommand("evaluate", "Score recommendations against the test split");
    evaluate->add_option("--recommendations", o.out, "Recommendation records to score");
    auto* ablate = app.add_subcommand("ablate", "Run the full model and its three ablations");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << error_json("usage", e.what()) << "\n";
        return usage;
    }

    try {
        PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_config(o.config);
        std::vector<std::string> warnings;
        validate_config(cfg, &warnings);
        for (const auto& w : warnings) err << "motivrec: warning: " << w << "\n";
        err << "motivrec: config fingerprint " << config_fingerprint(cfg) << "\n";

        const Workdir w{o.workdir};
        if (ingest->parsed()) return do_ingest(o, cfg, w, out);
        if (augment->parsed()) return do_augment(o, cfg, w, out);
        if (annotate->parsed()) return do_annotate(o, cfg, w, out);
        if (recommend->parsed()) return do_recommend(o, cfg, w, out);
        if (evaluate->parsed()) return do_evaluate(o, cfg, w, out);
        if (ablate->parsed()) return do_ablate(o, cfg, w, out);
        return usage;
    } catch (const MissingArtifactError& e) {
        err << error_json("missing_artifact", e.what(), e.stage()) << "\n";
        return missing_artifact;
    } catch (const ConfigError& e) {
        err << error_json("config", e.what()) << "\n";
        return usage;
    } catch (const std::exception& e) {
        err << error_json("failure", e.what()) << "\n";
        return failure;
    }
}

}  // namespace motivrec::cli
