#include "motivrec/retriever.hpp"

#include <algorithm>
#include <set>

#include "motivrec/error.hpp"
#include "motivrec/text.hpp"

namespace motivrec {
namespace {

const MotiveAnnotation* lookup(const RetrievalContext& ctx, const std::string& key) {
    const std::string owner = ctx.index.motive_owner(key);
    auto it = ctx.motives.find(owner);
    if (it == ctx.motives.end()) return nullptr;
    for (const auto& m : it->second) {
        if (m.key() == key) return &m;
    }
    return nullptr;
}

SelectedMotive make_pick(const MotiveAnnotation& m, Strategy strategy, double score) {
    return {m.key(), m.user_id, m.bundle_index, m.motive_text, strategy, score};
}

std::vector<SelectedMotive> picks_from(const RetrievalContext& ctx, const std::vector<ScoredKey>& hits,
                                       Strategy strategy) {
    std::vector<SelectedMotive> out;
    for (const auto& hit : hits) {
        const MotiveAnnotation* m = lookup(ctx, hit.key);
        if (!m) throw InputError("motive " + hit.key + " is indexed but missing from the annotation store");
        out.push_back(make_pick(*m, strategy, hit.score));
    }
    return out;
}

}  // namespace

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::exploit: return "exploit";
        case Strategy::diverse: return "diverse";
        case Strategy::social: return "social";
    }
    return "?";
}

std::vector<SelectedMotive> MotiveSelection::all() const {
    std::vector<SelectedMotive> out = exploit;
    out.insert(out.end(), diverse.begin(), diverse.end());
    out.insert(out.end(), social.begin(), social.end());
    return out;
}

std::vector<SelectedMotive> retrieve_exploit(const RetrievalContext& ctx, const std::string& user,
                                             const std::optional<Vector>& query, std::size_t k) {
    if (k == 0) return {};
    if (query) {
        if (ctx.index.size(Scope::user_motives(user)) == 0) return {};
        return picks_from(ctx, ctx.index.top_k(Scope::user_motives(user), *query, k), Strategy::exploit);
    }
    auto it = ctx.motives.find(user);
    if (it == ctx.motives.end()) return {};
    std::vector<const MotiveAnnotation*> order;
    for (const auto& m : it->second) order.push_back(&m);
    std::sort(order.begin(), order.end(), [](const MotiveAnnotation* a, const MotiveAnnotation* b) {
        if (a->time_span.first_ts != b->time_span.first_ts) return a->time_span.first_ts > b->time_span.first_ts;
        return a->bundle_index > b->bundle_index;
    });
    std::vector<SelectedMotive> out;
    for (std::size_t i = 0; i < order.size() && i < k; ++i) out.push_back(make_pick(*order[i], Strategy::exploit, 0.0));
    return out;
}

Vector pseudo_query(const RetrievalContext& ctx, const std::vector<SelectedMotive>& picks) {
    std::vector<const Vector*> vectors;
    for (const auto& p : picks) {
        if (const Vector* v = ctx.index.find(Scope::all_motives(), p.key)) vectors.push_back(v);
    }
    return mean_direction(vectors);
}

std::vector<SelectedMotive> retrieve_diverse(const RetrievalContext& ctx, const std::string& user,
                                             const Vector& query, const std::vector<SelectedMotive>& exploit,
                                             std::size_t k, double lambda) {
    if (k == 0 || ctx.index.size(Scope::user_motives(user)) == 0) return {};
    std::set<std::string> seeds;
    for (const auto& e : exploit) seeds.insert(e.key);
    const Scope scope = Scope::user_motives(user);
    std::vector<SelectedMotive> out;
    for (const auto& key : ctx.index.mmr_select(scope, query, seeds, k, lambda)) {
        const MotiveAnnotation* m = lookup(ctx, key);
        if (!m) throw InputError("motive " + key + " is indexed but missing from the annotation store");
        out.push_back(make_pick(*m, Strategy::diverse, dot(*ctx.index.find(scope, key), query)));
    }
    return out;
}

std::vector<SelectedMotive> retrieve_social(const RetrievalContext& ctx, const std::string& user,
                                            const Vector& query, std::size_t k) {
    if (k == 0) return {};
    const auto own = ctx.index.keys(Scope::user_motives(user));
    const std::set<std::string> exclude(own.begin(), own.end());
    if (ctx.index.size(Scope::all_motives()) <= exclude.size()) return {};
    return picks_from(ctx, ctx.index.top_k(Scope::all_motives(), query, k, exclude), Strategy::social);
}

MotiveSelection select_motives(const RetrievalContext& ctx, const std::string& user,
                               const std::optional<Vector>& query_vector, const PipelineConfig& cfg) {
    MotiveSelection sel;
    sel.exploit = retrieve_exploit(ctx, user, query_vector, static_cast<std::size_t>(cfg.k_exploit));
    if (!cfg.ablation.exploration_on) return sel;
    const Vector query = query_vector ? *query_vector : pseudo_query(ctx, sel.exploit);
    if (query.empty()) return sel;
    sel.diverse = retrieve_diverse(ctx, user, query, sel.exploit, static_cast<std::size_t>(cfg.k_div), cfg.mmr_lambda);
    sel.social = retrieve_social(ctx, user, query, static_cast<std::size_t>(cfg.k_social));
    return sel;
}

std::vector<std::string> salient_tokens(const std::string& request) {
    auto toks = text::tokens(request);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    return toks;
}

bool plan_covers_request(const std::vector<std::string>& queries, const std::string& request) {
    const auto needed = salient_tokens(request);
    if (needed.empty()) return true;
    for (const auto& q : queries) {
        const auto have = text::token_set(q);
        if (std::all_of(needed.begin(), needed.end(), [&](const std::string& t) { return have.contains(t); })) {
            return true;
        }
    }
    return false;
}

QueryPlan synthesize_queries(const std::optional<std::string>& request, const MotiveSelection& selection,
                             Gateway& gateway, std::size_t max_queries) {
    const bool has_request = request && !text::trim(*request).empty();
    if (selection.empty() && !has_request) throw PlanError("no motives and no request: nothing to search for");
    if (max_queries == 0) throw InputError("a plan needs room for at least one query");

    QueryPlan plan;
    if (has_request) plan.request = *request;
    std::vector<std::string> motive_texts;
    for (const auto& m : selection.all()) motive_texts.push_back(m.text);

    try {
        auto response = gateway.generate(TemplateName::query, {{"request", has_request ? *request : "(none)"},
                                                               {"motives", motive_texts},
                                                               {"n", std::to_string(max_queries)}});
        if (response.parsed()) plan.queries = response.queries();
    } catch (const TransportError&) {
    }
    if (plan.queries.size() > max_queries) plan.queries.resize(max_queries);
    if (plan.queries.empty()) {
        plan.fallback_used = true;
        for (const auto& t : motive_texts) {
            if (plan.queries.size() == max_queries) break;
            if (std::find(plan.queries.begin(), plan.queries.end(), t) == plan.queries.end()) plan.queries.push_back(t);
        }
    }
    if (has_request && !plan_covers_request(plan.queries, *request)) {
        plan.guard_applied = true;
        if (plan.queries.size() < max_queries) plan.queries.push_back(*request);
        else plan.queries.back() = *request;
    }
    return plan;
}

}  // namespace motivrec
