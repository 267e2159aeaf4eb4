#include "motivrec/pipeline.hpp"

#include "motivrec/error.hpp"
#include "motivrec/parallel.hpp"
#include "motivrec/text.hpp"

namespace motivrec {
namespace {

json selection_list(const std::vector<SelectedMotive>& picks) {
    json out = json::array();
    for (const auto& p : picks) {
        out.push_back({{"key", p.key},
                       {"user_id", p.user_id},
                       {"bundle_index", p.bundle_index},
                       {"text", p.text},
                       {"score", p.score}});
    }
    return out;
}

std::vector<SelectedMotive> selection_from(const json& j, Strategy strategy) {
    std::vector<SelectedMotive> out;
    for (const auto& p : j) {
        out.push_back({p.at("key").get<std::string>(), p.at("user_id").get<std::string>(),
                       p.at("bundle_index").get<int>(), p.at("text").get<std::string>(), strategy,
                       p.at("score").get<double>()});
    }
    return out;
}

}  // namespace

std::vector<std::string> Recommendation::item_ids() const {
    std::vector<std::string> out;
    for (const auto& i : items) out.push_back(i.item_id);
    return out;
}

json recommendation_to_json(const Recommendation& rec) {
    json iterations = json::array();
    for (const auto& it : rec.iterations) {
        iterations.push_back({{"queries", it.queries},
                              {"score", it.score ? json(*it.score) : json(nullptr)},
                              {"feedback", it.feedback}});
    }
    json items = json::array();
    for (const auto& i : rec.items) {
        items.push_back({{"item_id", i.item_id},
                         {"score", i.score},
                         {"queries", i.queries},
                         {"motives", i.motives},
                         {"iteration", i.iteration}});
    }
    return json{{"user_id", rec.user_id},
                {"request", rec.request ? json(*rec.request) : json(nullptr)},
                {"selection",
                 {{"exploit", selection_list(rec.selection.exploit)},
                  {"diverse", selection_list(rec.selection.diverse)},
                  {"social", selection_list(rec.selection.social)}}},
                {"plan",
                 {{"queries", rec.plan.queries},
                  {"guard_applied", rec.plan.guard_applied},
                  {"fallback_used", rec.plan.fallback_used}}},
                {"iterations", std::move(iterations)},
                {"terminal_reason", to_string(rec.terminal_reason)},
                {"verdict_calls", rec.verdict_calls},
                {"items", std::move(items)},
                {"notices", rec.notices},
                {"error", rec.error ? json(*rec.error) : json(nullptr)}};
}

Recommendation recommendation_from_json(const json& j) {
    Recommendation rec;
    rec.user_id = j.at("user_id").get<std::string>();
    if (!j.at("request").is_null()) rec.request = j.at("request").get<std::string>();
    const auto& sel = j.at("selection");
    rec.selection.exploit = selection_from(sel.at("exploit"), Strategy::exploit);
    rec.selection.diverse = selection_from(sel.at("diverse"), Strategy::diverse);
    rec.selection.social = selection_from(sel.at("social"), Strategy::social);
    rec.plan.request = rec.request;
    rec.plan.queries = j.at("plan").at("queries").get<std::vector<std::string>>();
    rec.plan.guard_applied = j.at("plan").at("guard_applied").get<bool>();
    rec.plan.fallback_used = j.at("plan").at("fallback_used").get<bool>();
    for (const auto& it : j.at("iterations")) {
        IterationRecord r;
        r.queries = it.at("queries").get<std::vector<std::string>>();
        if (!it.at("score").is_null()) r.score = it.at("score").get<double>();
        r.feedback = it.at("feedback").get<std::string>();
        rec.iterations.push_back(std::move(r));
    }
    rec.terminal_reason = terminal_reason_from_string(j.at("terminal_reason").get<std::string>());
    rec.verdict_calls = j.at("verdict_calls").get<int>();
    for (const auto& i : j.at("items")) {
        rec.items.push_back({i.at("item_id").get<std::string>(), i.at("score").get<double>(),
                             i.at("queries").get<std::vector<std::string>>(),
                             i.at("motives").get<std::vector<std::string>>(), i.at("iteration").get<int>()});
    }
    rec.notices = j.at("notices").get<std::vector<std::string>>();
    if (!j.at("error").is_null()) rec.error = j.at("error").get<std::string>();
    return rec;
}

void prime_backend(Gateway& gateway, const DatasetBundle& data) {
    auto* mock = dynamic_cast<MockBackend*>(&gateway.backend());
    if (!mock) return;
    std::vector<std::string> docs;
    for (const auto& [id, item] : data.items) {
        docs.push_back(item.augmented_text ? *item.augmented_text : text::serialize_metadata(item.raw_metadata));
    }
    mock->observe_corpus(docs);
}

Engine::Engine(const DatasetBundle& data, const VectorIndex& index, const MotiveStore& motives, Gateway& gateway,
               PipelineConfig cfg)
    : data_(data), index_(index), motives_(motives), gateway_(&gateway), cfg_(std::move(cfg)) {
    validate_config(cfg_);
    if (index_.size(Scope::items()) == 0) throw InputError("engine needs a populated item namespace");
}

Recommendation Engine::recommend(const std::string& user, const std::optional<std::string>& request) const {
    if (!data_.users.contains(user)) throw InputError("unknown user " + user);
    Recommendation rec;
    rec.user_id = user;
    if (request && !text::trim(*request).empty()) rec.request = *request;

    try {
        std::optional<Vector> query_vector;
        if (rec.request) query_vector = gateway_->embed_one(*rec.request);

        const RetrievalContext rctx{index_, motives_};
        rec.selection = select_motives(rctx, user, query_vector, cfg_);
        rec.plan = synthesize_queries(rec.request, rec.selection, *gateway_,
                                      static_cast<std::size_t>(cfg_.queries_per_plan));

        const auto train = data_.train_items(user);
        const std::set<std::string> history(train.begin(), train.end());
        const std::set<std::string> exclude = cfg_.exclude_history ? history : std::set<std::string>{};

        auto outcome = reflect_and_refine({index_, data_.items, *gateway_}, rec.plan, rec.selection, cfg_, exclude);
        rec.iterations = outcome.iterations;
        rec.terminal_reason = outcome.ranked.terminal_reason;
        rec.verdict_calls = outcome.verdict_calls;
        rec.notices = outcome.notices;
        rec.items = finalize(outcome.ranked, outcome.iterations.back().queries, rec.selection, history,
                             cfg_.exclude_history, static_cast<std::size_t>(cfg_.max_cutoff()));
        if (rec.items.empty()) rec.notices.push_back("no items left after history exclusion");
    } catch (const PlanError& e) {
        rec.error = e.what();
    } catch (const TransportError& e) {
        rec.error = e.what();
    }
    return rec;
}

std::vector<Recommendation> Engine::recommend_all(const std::vector<std::string>& users, int jobs,
                                                  const std::optional<std::string>& request) const {
    std::vector<Recommendation> out(users.size());
    parallel_for(users.size(), jobs, [&](std::size_t i) { out[i] = recommend(users[i], request); });
    return out;
}

Artifacts prepare_artifacts(DatasetBundle data, Gateway& gateway, const PipelineConfig& cfg, int jobs,
                            const AugmentOptions& augment) {
    Artifacts a{std::move(data), VectorIndex(gateway.backend().dimension()), {}, {}, {}, {}};
    AugmentOptions opts = augment;
    opts.jobs = jobs;
    a.augment_report = build_item_index(a.data.items, gateway, a.index, opts);
    prime_backend(gateway, a.data);
    reannotate(a, gateway, cfg, jobs);
    return a;
}

void reannotate(Artifacts& a, Gateway& gateway, const PipelineConfig& cfg, int jobs) {
    a.annotation_report = build_motive_index(a.data, gateway, a.index, cfg, jobs);
    a.motives = a.annotation_report.motives;
    a.store = group_by_user(a.motives);
}

}  // namespace motivrec
