#include "motivrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>

#include "motivrec/error.hpp"
#include "motivrec/parallel.hpp"

namespace motivrec {
namespace {

std::string fixed(double v, int precision) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::vector<std::string> column_keys(const std::vector<int>& cutoffs) {
    std::vector<std::string> keys;
    for (const auto& m : metric_names()) {
        for (int k : cutoffs) keys.push_back(metric_key(m, k));
    }
    return keys;
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream os;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            os << (c ? "  " : "") << (c + 1 == cells.size() ? cells[c] : pad(cells[c], width[c]));
        }
        os << '\n';
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return os.str();
}

}  // namespace

std::string metric_key(const std::string& metric, int k) { return metric + "@" + std::to_string(k); }

RelevanceSets relevance_sets(const DatasetBundle& data) {
    RelevanceSets out;
    for (const auto& e : data.events_in(SplitTag::test)) out.by_user[e.user_id].insert(e.item_id);
    if (out.by_user.empty()) throw EmptyDatasetError("the test split is empty");
    for (const auto& [user, rec] : data.users) {
        if (!out.by_user.contains(user)) ++out.users_without_test;
    }
    return out;
}

EvalResult metrics_at_k(const RecommendationLists& recommendations, const RelevanceSets& relevance,
                        const std::map<std::string, ItemRecord>& items, const std::vector<int>& cutoffs, int jobs) {
    if (relevance.by_user.empty()) throw EmptyDatasetError("no users to evaluate");
    if (items.empty()) throw EmptyDatasetError("empty catalog");
    static const std::vector<std::string> kNoList;

    EvalResult result;
    result.users_evaluated = relevance.by_user.size();
    result.users_without_test = relevance.users_without_test;

    for (int k : cutoffs) {
        if (k <= 0) throw ConfigError("cutoffs must be positive");
    }
    std::vector<const std::string*> users;
    for (const auto& [user, rel] : relevance.by_user) users.push_back(&user);
    std::vector<std::map<std::string, double>> rows(users.size());
    parallel_for(users.size(), jobs, [&](std::size_t u) {
        const auto& rel = relevance.by_user.at(*users[u]);
        auto it = recommendations.find(*users[u]);
        const auto& list = it == recommendations.end() ? kNoList : it->second;
        for (int k : cutoffs) {
            const auto K = static_cast<std::size_t>(k);
            double hits = 0.0, dcg = 0.0, rr = 0.0;
            for (std::size_t r = 0; r < list.size() && r < K; ++r) {
                if (!rel.contains(list[r])) continue;
                hits += 1.0;
                dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
                if (rr == 0.0) rr = 1.0 / static_cast<double>(r + 1);
            }
            double idcg = 0.0;
            for (std::size_t r = 0; r < std::min(rel.size(), K); ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
            rows[u][metric_key("Recall", k)] = hits / static_cast<double>(rel.size());
            rows[u][metric_key("nDCG", k)] = dcg / idcg;
            rows[u][metric_key("MRR", k)] = rr;
        }
    });
    for (std::size_t u = 0; u < users.size(); ++u) result.per_user[*users[u]] = rows[u];

    for (int k : cutoffs) {
        const auto K = static_cast<std::size_t>(k);
        double recall = 0.0, ndcg = 0.0, mrr = 0.0;
        for (const auto& row : rows) {
            recall += row.at(metric_key("Recall", k));
            ndcg += row.at(metric_key("nDCG", k));
            mrr += row.at(metric_key("MRR", k));
        }
        const auto n = static_cast<double>(relevance.by_user.size());
        result.metrics[metric_key("Recall", k)] = recall / n;
        result.metrics[metric_key("nDCG", k)] = ndcg / n;
        result.metrics[metric_key("MRR", k)] = mrr / n;

        std::set<std::string> shown;
        double pop = 0.0;
        std::size_t pop_users = 0;
        for (const auto& [user, list] : recommendations) {
            const std::size_t len = std::min(list.size(), K);
            if (len == 0) continue;
            double sum = 0.0;
            for (std::size_t r = 0; r < len; ++r) {
                shown.insert(list[r]);
                auto item = items.find(list[r]);
                if (item != items.end()) sum += static_cast<double>(item->second.popularity);
            }
            pop += sum / static_cast<double>(len);
            ++pop_users;
        }
        std::size_t in_catalog = 0;
        for (const auto& id : shown) in_catalog += items.contains(id) ? 1 : 0;
        result.metrics[metric_key("Coverage", k)] = static_cast<double>(in_catalog) / static_cast<double>(items.size());
        result.metrics[metric_key("Pop", k)] = pop_users ? pop / static_cast<double>(pop_users) : 0.0;
    }
    return result;
}

RecommendationLists lists_from(const std::vector<Recommendation>& recs) {
    RecommendationLists out;
    for (const auto& r : recs) out[r.user_id] = r.item_ids();
    return out;
}

json eval_to_json(const EvalResult& result, const std::vector<int>& cutoffs) {
    json metrics = json::object();
    for (const auto& key : column_keys(cutoffs)) metrics[key] = result.metrics.at(key);
    return json{{"metrics", metrics},
                {"fingerprint", result.fingerprint},
                {"users_evaluated", result.users_evaluated},
                {"users_without_test", result.users_without_test},
                {"per_user", result.per_user}};
}

std::string format_eval_table(const std::vector<std::pair<std::string, const EvalResult*>>& rows,
                              const std::vector<int>& cutoffs) {
    const auto keys = column_keys(cutoffs);
    std::vector<std::string> header{"run"};
    header.insert(header.end(), keys.begin(), keys.end());
    std::vector<std::vector<std::string>> cells;
    for (const auto& [name, result] : rows) {
        std::vector<std::string> row{name};
        for (const auto& key : keys) row.push_back(fixed(result->metrics.at(key), 4));
        cells.push_back(std::move(row));
    }
    return render_table(header, cells);
}

std::vector<AblationVariant> standard_variants(const PipelineConfig& base) {
    std::vector<AblationVariant> out;
    PipelineConfig full = base;
    full.ablation = AblationFlags{};
    out.push_back({"full", full});
    auto annotation = full;
    annotation.ablation.annotation_on = false;
    out.push_back({"w/o Annotation", annotation});
    auto exploration = full;
    exploration.ablation.exploration_on = false;
    out.push_back({"w/o Exploration", exploration});
    auto reflection = full;
    reflection.ablation.reflection_on = false;
    out.push_back({"w/o Reflection", reflection});
    return out;
}

std::string AblationReport::text() const {
    const AblationRow* ref = rows.empty() || !rows.front().result ? nullptr : &rows.front();
    std::vector<std::string> header{"variant"};
    for (int k : cutoffs) {
        header.push_back(metric_key("Recall", k));
        header.push_back(metric_key("nDCG", k));
    }
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : rows) {
        std::vector<std::string> line{row.name};
        for (int k : cutoffs) {
            for (const char* m : {"Recall", "nDCG"}) {
                if (!row.result) {
                    line.push_back("failed");
                    continue;
                }
                const double v = row.result->at(m, k);
                std::string cell = fixed(v, 4);
                if (ref && &row != ref) {
                    const double base = ref->result->at(m, k);
                    cell += base > 0.0 ? " (" + std::string(v >= base ? "+" : "-") +
                                             fixed(std::abs(v - base) / base * 100.0, 1) + "%)"
                                       : " (n/a)";
                }
                line.push_back(cell);
            }
        }
        cells.push_back(std::move(line));
    }
    std::string out = render_table(header, cells);
    for (const auto& row : rows) {
        if (!row.result) out += row.name + ": " + row.error + "\n";
    }
    return out;
}

json AblationReport::to_json() const {
    json out = json::array();
    for (const auto& row : rows) {
        json entry{{"name", row.name}};
        if (row.result) {
            entry["result"] = eval_to_json(*row.result, cutoffs);
            entry["result"].erase("per_user");
        } else {
            entry["error"] = row.error;
        }
        out.push_back(std::move(entry));
    }
    return json{{"cutoffs", cutoffs}, {"variants", out}};
}

AblationReport run_ablation_grid(const Artifacts& artifacts, bool artifacts_annotated, Gateway& gateway,
                                 const std::vector<AblationVariant>& variants, int jobs) {
    if (variants.empty()) throw ConfigError("no ablation variants");
    AblationReport report;
    report.cutoffs = variants.front().cfg.top_k_eval;
    const auto relevance = relevance_sets(artifacts.data);
    std::vector<std::string> users;
    for (const auto& [id, rec] : artifacts.data.users) users.push_back(id);

    std::unique_ptr<Artifacts> rebuilt;
    for (const auto& variant : variants) {
        AblationRow row{variant.name, std::nullopt, {}};
        try {
            const Artifacts* source = &artifacts;
            if (variant.cfg.ablation.annotation_on != artifacts_annotated) {
                if (!rebuilt) {
                    rebuilt = std::make_unique<Artifacts>(artifacts);
                    reannotate(*rebuilt, gateway, variant.cfg, jobs);
                }
                source = rebuilt.get();
            }
            const Engine engine(source->data, source->index, source->store, gateway, variant.cfg);
            const auto recs = engine.recommend_all(users, jobs);
            auto result = metrics_at_k(lists_from(recs), relevance, source->data.items, report.cutoffs, jobs);
            result.fingerprint = config_fingerprint(variant.cfg);
            row.result = std::move(result);
        } catch (const Error& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace motivrec
