#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "motivrec/config.hpp"
#include "motivrec/corpus.hpp"
#include "motivrec/gateway.hpp"
#include "motivrec/pipeline.hpp"

namespace motivrec {

struct RelevanceSets {
    std::map<std::string, std::set<std::string>> by_user;  // users with at least one test item
    std::size_t users_without_test = 0;
};

/// Test-split items per user. Throws EmptyDatasetError when the test split is empty.
RelevanceSets relevance_sets(const DatasetBundle& data);

/// Metric names as reported: Recall, nDCG, MRR, Coverage, Pop.
inline const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {"Recall", "nDCG", "MRR", "Coverage", "Pop"};
    return names;
}
std::string metric_key(const std::string& metric, int k);

struct EvalResult {
    std::map<std::string, double> metrics;                               // "nDCG@10" -> value
    std::map<std::string, std::map<std::string, double>> per_user;       // user -> accuracy metrics
    std::string fingerprint;
    std::size_t users_evaluated = 0;
    std::size_t users_without_test = 0;

    double at(const std::string& metric, int k) const { return metrics.at(metric_key(metric, k)); }
};

using RecommendationLists = std::map<std::string, std::vector<std::string>>;

/// Full-ranking metrics, macro-averaged over users with a relevance set.
/// Coverage counts every user's list; Pop averages over users with a
/// non-empty list. Lists shorter than K are scored on what they have.
EvalResult metrics_at_k(const RecommendationLists& recommendations, const RelevanceSets& relevance,
                        const std::map<std::string, ItemRecord>& items, const std::vector<int>& cutoffs,
                        int jobs = 1);

RecommendationLists lists_from(const std::vector<Recommendation>& recs);

json eval_to_json(const EvalResult& result, const std::vector<int>& cutoffs);
/// Aligned text table, one column per metric and cutoff.
std::string format_eval_table(const std::vector<std::pair<std::string, const EvalResult*>>& rows,
                              const std::vector<int>& cutoffs);

struct AblationVariant {
    std::string name;
    PipelineConfig cfg;
};

/// Full model plus the three single-switch ablations.
std::vector<AblationVariant> standard_variants(const PipelineConfig& base);

struct AblationRow {
    std::string name;
    std::optional<EvalResult> result;
    std::string error;
};

struct AblationReport {
    std::vector<AblationRow> rows;  // the first row is the reference
    std::vector<int> cutoffs;

    /// Values with the relative change against the first row, e.g. `0.1015 (-12.3%)`.
    std::string text() const;
    json to_json() const;
};

/// Evaluates each variant over every user. Item vectors are shared; motives
/// are rebuilt only for variants whose annotation switch differs from the
/// artifacts'. A failing variant is recorded and the grid continues.
AblationReport run_ablation_grid(const Artifacts& artifacts, bool artifacts_annotated, Gateway& gateway,
                                 const std::vector<AblationVariant>& variants, int jobs = 1);

}  // namespace motivrec
