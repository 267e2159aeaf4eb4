#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "motivrec/annotator.hpp"
#include "motivrec/augmenter.hpp"
#include "motivrec/config.hpp"
#include "motivrec/corpus.hpp"
#include "motivrec/gateway.hpp"
#include "motivrec/retriever.hpp"
#include "motivrec/searcher.hpp"
#include "motivrec/vector_index.hpp"

namespace motivrec {

/// Everything one user's run produced: the audit record.
struct Recommendation {
    std::string user_id;
    std::optional<std::string> request;
    MotiveSelection selection;
    QueryPlan plan;
    std::vector<IterationRecord> iterations;
    TerminalReason terminal_reason = TerminalReason::max_iters;
    int verdict_calls = 0;
    std::vector<RecommendedItem> items;
    std::vector<std::string> notices;
    std::optional<std::string> error;

    std::vector<std::string> item_ids() const;
    bool operator==(const Recommendation&) const = default;
};

json recommendation_to_json(const Recommendation& rec);
Recommendation recommendation_from_json(const json& j);

/// Gives the mock backend catalog-wide token statistics. No-op for other backends.
void prime_backend(Gateway& gateway, const DatasetBundle& data);

/// Runs retrieval, synthesis and the search loop for single users.
class Engine {
public:
    Engine(const DatasetBundle& data, const VectorIndex& index, const MotiveStore& motives, Gateway& gateway,
           PipelineConfig cfg);

    Recommendation recommend(const std::string& user, const std::optional<std::string>& request = {}) const;

    /// One record per user, in input order. `jobs` bounds concurrent users.
    std::vector<Recommendation> recommend_all(const std::vector<std::string>& users, int jobs,
                                              const std::optional<std::string>& request = {}) const;

    const PipelineConfig& config() const { return cfg_; }

private:
    const DatasetBundle& data_;
    const VectorIndex& index_;
    const MotiveStore& motives_;
    Gateway* gateway_;
    PipelineConfig cfg_;
};

/// The offline artifacts: augmented catalog, item and motive vectors, motives.
struct Artifacts {
    DatasetBundle data;
    VectorIndex index;
    std::vector<MotiveAnnotation> motives;
    MotiveStore store;
    AugmentReport augment_report;
    AnnotationResult annotation_report;
};

Artifacts prepare_artifacts(DatasetBundle data, Gateway& gateway, const PipelineConfig& cfg, int jobs = 1,
                            const AugmentOptions& augment = {});

/// Rebuilds motives and the motive namespaces under `cfg`, keeping items.
void reannotate(Artifacts& artifacts, Gateway& gateway, const PipelineConfig& cfg, int jobs = 1);

}  // namespace motivrec
