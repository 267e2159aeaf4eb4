#include "motivrec/searcher.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "motivrec/error.hpp"
#include "motivrec/text.hpp"

namespace motivrec {
namespace {

constexpr std::size_t kSummaryChars = 300;

RankedList search_once(const SearchContext& ctx, const std::vector<std::string>& queries, std::size_t depth,
                       double k0, const std::set<std::string>& exclude, std::vector<std::string>& notices,
                       std::vector<std::string>& kept) {
    auto dense = dense_retrieve(ctx.index, queries, depth, ctx.gateway, exclude);
    for (const auto& q : dense.dropped) notices.push_back("query dropped after embedding failure: " + q);
    kept = dense.queries;
    return rrf_fuse(dense.rankings, k0);
}

}  // namespace

std::string to_string(TerminalReason r) {
    switch (r) {
        case TerminalReason::score_met: return "score_met";
        case TerminalReason::max_iters: return "max_iters";
        case TerminalReason::no_refinement: return "no_refinement";
        case TerminalReason::verdict_error: return "verdict_error";
    }
    return "?";
}

TerminalReason terminal_reason_from_string(const std::string& s) {
    if (s == "score_met") return TerminalReason::score_met;
    if (s == "max_iters") return TerminalReason::max_iters;
    if (s == "no_refinement") return TerminalReason::no_refinement;
    if (s == "verdict_error") return TerminalReason::verdict_error;
    throw InputError("unknown terminal reason " + s);
}

DenseResult dense_retrieve(const VectorIndex& index, const std::vector<std::string>& queries, std::size_t depth,
                           Gateway& gateway, const std::set<std::string>& exclude) {
    if (queries.empty()) throw PlanError("no queries to retrieve with");
    if (index.size(Scope::items()) == 0) throw InputError("the item namespace is empty");
    DenseResult result;
    for (const auto& q : queries) {
        Vector qv;
        try {
            qv = gateway.embed_one(q);
        } catch (const TransportError&) {
            result.dropped.push_back(q);
            continue;
        } catch (const InputError&) {
            result.dropped.push_back(q);
            continue;
        }
        std::vector<std::string> ranking;
        for (auto& hit : index.top_k(Scope::items(), qv, depth, exclude)) ranking.push_back(std::move(hit.key));
        result.queries.push_back(q);
        result.rankings.push_back(std::move(ranking));
    }
    if (result.queries.empty()) throw PlanError("every query failed to embed");
    return result;
}

RankedList rrf_fuse(const std::vector<std::vector<std::string>>& rankings, double k0) {
    if (!(k0 > 0.0)) throw InputError("rrf constant must be positive");
    std::unordered_map<std::string, std::size_t> slot;
    RankedList out;
    for (std::size_t q = 0; q < rankings.size(); ++q) {
        std::unordered_set<std::string> seen;
        for (std::size_t r = 0; r < rankings[q].size(); ++r) {
            const std::string& id = rankings[q][r];
            if (!seen.insert(id).second) continue;
            auto [it, fresh] = slot.emplace(id, out.entries.size());
            if (fresh) out.entries.push_back({id, 0.0, {}});
            auto& entry = out.entries[it->second];
            const int rank = static_cast<int>(r + 1);
            entry.fused_score += 1.0 / (k0 + rank);
            entry.ranks.push_back({static_cast<int>(q), rank});
        }
    }
    std::sort(out.entries.begin(), out.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
        if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
        return a.item_id < b.item_id;
    });
    return out;
}

std::string candidate_summary(const ItemRecord& item) {
    std::string title = item.item_id;
    if (auto it = item.raw_metadata.find("title"); it != item.raw_metadata.end()) title = it->second;
    const std::string body = item.augmented_text ? *item.augmented_text : text::serialize_metadata(item.raw_metadata);
    std::string flat = body;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    return title + " | " + text::truncate_words(flat, kSummaryChars);
}

SearchOutcome reflect_and_refine(const SearchContext& ctx, const QueryPlan& plan, const MotiveSelection& selection,
                                 const PipelineConfig& cfg, const std::set<std::string>& exclude) {
    const auto depth = static_cast<std::size_t>(cfg.retrieval_depth);
    const int budget = cfg.effective_reflections();

    SearchOutcome out;
    std::vector<std::string> queries;
    out.ranked = search_once(ctx, plan.queries, depth, cfg.rrf_constant, exclude, out.notices, queries);
    out.iterations.push_back({queries, std::nullopt, {}});
    out.ranked.terminal_reason = TerminalReason::max_iters;

    std::vector<std::string> motive_texts;
    for (const auto& m : selection.all()) motive_texts.push_back(m.text);
    const std::string request = plan.request.value_or("(none)");

    for (int t = 1; t <= budget && !out.ranked.entries.empty(); ++t) {
        std::vector<std::string> candidates;
        for (const auto& e : out.ranked.entries) {
            if (candidates.size() == static_cast<std::size_t>(cfg.verifier_candidates)) break;
            candidates.push_back(candidate_summary(ctx.items.at(e.item_id)));
        }
        std::optional<ReflectVerdict> verdict;
        ++out.verdict_calls;
        try {
            auto response = ctx.gateway.generate(TemplateName::reflect, {{"request", request},
                                                                         {"motives", motive_texts},
                                                                         {"queries", queries},
                                                                         {"candidates", candidates}});
            if (response.parsed()) verdict = response.verdict();
            else out.notices.push_back("verdict unparsable: " + response.parse_error);
        } catch (const TransportError& e) {
            out.notices.push_back(std::string("verdict failed: ") + e.what());
        }
        if (!verdict) {
            out.ranked.terminal_reason = TerminalReason::verdict_error;
            break;
        }
        out.iterations.back().score = verdict->score;
        out.iterations.back().feedback = verdict->feedback;
        if (verdict->score >= cfg.reflection_threshold) {
            out.ranked.terminal_reason = TerminalReason::score_met;
            break;
        }
        if (t == budget) {
            out.ranked.terminal_reason = TerminalReason::max_iters;
            break;
        }
        auto refined = verdict->refined_queries;
        if (refined.size() > static_cast<std::size_t>(cfg.queries_per_plan)) {
            refined.resize(static_cast<std::size_t>(cfg.queries_per_plan));
        }
        if (refined.empty() || refined == queries) {
            out.ranked.terminal_reason = TerminalReason::no_refinement;
            break;
        }
        out.ranked = search_once(ctx, refined, depth, cfg.rrf_constant, exclude, out.notices, queries);
        out.iterations.push_back({queries, std::nullopt, {}});
    }
    out.ranked.iteration = static_cast<int>(out.iterations.size()) - 1;
    return out;
}

std::vector<RecommendedItem> finalize(const RankedList& ranked, const std::vector<std::string>& final_queries,
                                      const MotiveSelection& selection, const std::set<std::string>& history,
                                      bool exclude_history, std::size_t cutoff) {
    std::vector<std::string> motive_keys;
    for (const auto& m : selection.all()) motive_keys.push_back(m.key);
    std::vector<RecommendedItem> out;
    for (const auto& e : ranked.entries) {
        if (out.size() == cutoff) break;
        if (exclude_history && history.contains(e.item_id)) continue;
        RecommendedItem item{e.item_id, e.fused_score, {}, motive_keys, ranked.iteration};
        for (const auto& qr : e.ranks) {
            if (qr.query >= 0 && static_cast<std::size_t>(qr.query) < final_queries.size()) {
                item.queries.push_back(final_queries[static_cast<std::size_t>(qr.query)]);
            }
        }
        out.push_back(std::move(item));
    }
    return out;
}

}  // namespace motivrec
