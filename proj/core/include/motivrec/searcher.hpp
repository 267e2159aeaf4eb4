#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "motivrec/config.hpp"
#include "motivrec/gateway.hpp"
#include "motivrec/retriever.hpp"
#include "motivrec/vector_index.hpp"

namespace motivrec {

enum class TerminalReason { score_met, max_iters, no_refinement, verdict_error };
std::string to_string(TerminalReason r);
TerminalReason terminal_reason_from_string(const std::string& s);

struct QueryRank {
    int query = 0;  // position in the plan
    int rank = 0;   // 1-based

    bool operator==(const QueryRank&) const = default;
};

struct RankedEntry {
    std::string item_id;
    double fused_score = 0.0;
    std::vector<QueryRank> ranks;

    bool operator==(const RankedEntry&) const = default;
};

struct RankedList {
    std::vector<RankedEntry> entries;  // fused score descending, ties by item id
    int iteration = 0;
    TerminalReason terminal_reason = TerminalReason::max_iters;

    bool operator==(const RankedList&) const = default;
};

struct DenseResult {
    std::vector<std::string> queries;                 // the ones that embedded
    std::vector<std::vector<std::string>> rankings;   // one ranked item list per kept query
    std::vector<std::string> dropped;
};

/// Embeds each query and takes the top `depth` items. Queries that fail to
/// embed are dropped; losing all of them throws PlanError.
DenseResult dense_retrieve(const VectorIndex& index, const std::vector<std::string>& queries, std::size_t depth,
                           Gateway& gateway, const std::set<std::string>& exclude = {});

/// score(i) = sum over lists containing i of 1 / (k0 + rank). Only the first
/// occurrence of an item within one list counts.
RankedList rrf_fuse(const std::vector<std::vector<std::string>>& rankings, double k0);

struct IterationRecord {
    std::vector<std::string> queries;
    std::optional<double> score;
    std::string feedback;

    bool operator==(const IterationRecord&) const = default;
};

struct SearchOutcome {
    RankedList ranked;
    std::vector<IterationRecord> iterations;  // v0..vT
    std::vector<std::string> notices;
    int verdict_calls = 0;
};

/// Read-only inputs for one user's search loop.
struct SearchContext {
    const VectorIndex& index;
    const std::map<std::string, ItemRecord>& items;
    Gateway& gateway;
};

/// Retrieves, fuses and lets the model verify the ranking, re-querying with
/// its refinements until the score reaches the threshold or the reflection
/// budget runs out. Verdict failures keep the current ranking.
SearchOutcome reflect_and_refine(const SearchContext& ctx, const QueryPlan& plan, const MotiveSelection& selection,
                                 const PipelineConfig& cfg, const std::set<std::string>& exclude = {});

/// What the verifier sees for one candidate: title and a truncated augmented text.
std::string candidate_summary(const ItemRecord& item);

struct RecommendedItem {
    std::string item_id;
    double score = 0.0;
    std::vector<std::string> queries;  // plan queries that retrieved the item
    std::vector<std::string> motives;  // motive keys behind the plan
    int iteration = 0;

    bool operator==(const RecommendedItem&) const = default;
};

/// Removes history items when asked and cuts to `cutoff`, attaching the audit trail.
std::vector<RecommendedItem> finalize(const RankedList& ranked, const std::vector<std::string>& final_queries,
                                      const MotiveSelection& selection, const std::set<std::string>& history,
                                      bool exclude_history, std::size_t cutoff);

}  // namespace motivrec
