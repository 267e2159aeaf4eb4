#pragma once

#include <optional>
#include <string>
#include <vector>

#include "motivrec/annotator.hpp"
#include "motivrec/config.hpp"
#include "motivrec/gateway.hpp"
#include "motivrec/vector_index.hpp"

namespace motivrec {

enum class Strategy { exploit, diverse, social };
std::string to_string(Strategy s);

struct SelectedMotive {
    std::string key;
    std::string user_id;
    int bundle_index = 0;
    std::string text;
    Strategy strategy = Strategy::exploit;
    double score = 0.0;  // similarity to the query; 0 for recency picks

    bool operator==(const SelectedMotive&) const = default;
};

/// Exploit, diverse and social picks. The lists never share a motive key and
/// social never holds the target user's own motives.
struct MotiveSelection {
    std::vector<SelectedMotive> exploit;
    std::vector<SelectedMotive> diverse;
    std::vector<SelectedMotive> social;

    bool empty() const { return exploit.empty() && diverse.empty() && social.empty(); }
    /// Union in exploit, diverse, social order.
    std::vector<SelectedMotive> all() const;
};

/// Read-only state shared by every retrieval of one run.
struct RetrievalContext {
    const VectorIndex& index;
    const MotiveStore& motives;
};

/// With a query vector: the k most similar of the user's motives. Without:
/// the k most recent bundles, newest first.
std::vector<SelectedMotive> retrieve_exploit(const RetrievalContext& ctx, const std::string& user,
                                             const std::optional<Vector>& query, std::size_t k);

/// Stand-in query when the user gave none: normalized mean of the picked motive vectors.
Vector pseudo_query(const RetrievalContext& ctx, const std::vector<SelectedMotive>& picks);

/// MMR over the user's motives, penalized against the exploit picks.
std::vector<SelectedMotive> retrieve_diverse(const RetrievalContext& ctx, const std::string& user,
                                             const Vector& query, const std::vector<SelectedMotive>& exploit,
                                             std::size_t k, double lambda);

/// Top-k over all motives with the user's own excluded.
std::vector<SelectedMotive> retrieve_social(const RetrievalContext& ctx, const std::string& user,
                                            const Vector& query, std::size_t k);

/// Runs the three strategies per the ablation flags. `query_vector` is the
/// embedding of the explicit request, when there is one.
MotiveSelection select_motives(const RetrievalContext& ctx, const std::string& user,
                               const std::optional<Vector>& query_vector, const PipelineConfig& cfg);

struct QueryPlan {
    std::optional<std::string> request;
    std::vector<std::string> queries;
    bool guard_applied = false;   // the request was added after synthesis
    bool fallback_used = false;   // motive texts used verbatim after a failed synthesis

    bool operator==(const QueryPlan&) const = default;
};

/// Tokens of the request that matter for the fidelity check.
std::vector<std::string> salient_tokens(const std::string& request);

/// True when some query contains every salient request token.
bool plan_covers_request(const std::vector<std::string>& queries, const std::string& request);

/// Asks the model for at most `max_queries` search queries. Throws PlanError
/// when there is neither a selection nor a request.
QueryPlan synthesize_queries(const std::optional<std::string>& request, const MotiveSelection& selection,
                             Gateway& gateway, std::size_t max_queries);

}  // namespace motivrec
