#include "motivrec/annotator.hpp"

#include <algorithm>
#include <mutex>

#include "motivrec/error.hpp"
#include "motivrec/parallel.hpp"
#include "motivrec/serialize.hpp"
#include "motivrec/text.hpp"

namespace motivrec {
namespace {

constexpr std::size_t kEmbedBatch = 64;

std::string title_of(const std::map<std::string, ItemRecord>& items, const std::string& id) {
    auto it = items.find(id);
    if (it == items.end()) return id;
    if (auto t = it->second.raw_metadata.find("title"); t != it->second.raw_metadata.end()) return t->second;
    return id;
}

}  // namespace

std::vector<Bundle> build_bundles(const UserRecord& user, int window, int stride, bool whole_history) {
    if (window < 1 || stride < 1 || stride > window) {
        throw InputError("bundling needs window >= 1 and 1 <= stride <= window");
    }
    if (!std::is_sorted(user.history.begin(), user.history.end(), history_before)) {
        throw InputError("history of user " + user.user_id + " is not in chronological order");
    }
    std::vector<const InteractionEvent*> train;
    for (const auto& e : user.history) {
        if (e.split == SplitTag::train) train.push_back(&e);
    }
    std::vector<Bundle> out;
    if (train.empty()) return out;

    auto make = [&](std::size_t begin, std::size_t end) {
        Bundle b;
        for (std::size_t i = begin; i < end; ++i) b.items.push_back(train[i]->item_id);
        b.span = {train[begin]->timestamp, train[end - 1]->timestamp};
        return b;
    };
    if (whole_history) out.push_back(make(0, train.size()));
    const auto w = static_cast<std::size_t>(window);
    const auto s = static_cast<std::size_t>(stride);
    for (std::size_t start = 0; start < train.size(); start += s) {
        out.push_back(make(start, std::min(start + w, train.size())));
    }
    return out;
}

std::optional<std::string> annotate_bundle(const Bundle& bundle, const Metadata& user_metadata,
                                           const std::map<std::string, ItemRecord>& items, Gateway& gateway,
                                           bool annotation_on) {
    if (bundle.items.empty()) throw InputError("cannot annotate an empty bundle");
    if (!annotation_on) {
        std::string titles;
        for (const auto& id : bundle.items) {
            if (!titles.empty()) titles += "; ";
            titles += title_of(items, id);
        }
        return titles;
    }

    std::vector<std::string> texts;
    for (const auto& id : bundle.items) {
        auto it = items.find(id);
        if (it == items.end()) throw InputError("bundle item " + id + " is not in the catalog");
        const ItemRecord& item = it->second;
        texts.push_back(item.augmented_text ? *item.augmented_text : text::serialize_metadata(item.raw_metadata));
    }
    const std::string profile = user_metadata.empty() ? "(none)" : text::serialize_metadata(user_metadata);
    try {
        auto response = gateway.generate(TemplateName::annotate, {{"items", texts}, {"user_metadata", profile}});
        if (!response.parsed()) return std::nullopt;
        const std::string& motive = response.text();
        for (const auto& id : bundle.items) {
            const ItemRecord& item = items.at(id);
            if (motive == text::serialize_metadata(item.raw_metadata) || (item.augmented_text && motive == *item.augmented_text)) {
                return std::nullopt;
            }
        }
        return motive;
    } catch (const TransportError&) {
        return std::nullopt;
    }
}

AnnotationResult build_motive_index(const DatasetBundle& data, Gateway& gateway, VectorIndex& index,
                                    const PipelineConfig& cfg, int jobs) {
    if (index.dimension() != gateway.backend().dimension()) {
        throw DimensionError("index dimension does not match the embedding backend");
    }
    std::vector<const UserRecord*> users;
    for (const auto& [id, user] : data.users) users.push_back(&user);

    std::vector<std::vector<MotiveAnnotation>> per_user(users.size());
    std::vector<std::vector<std::string>> notices(users.size());
    parallel_for(users.size(), jobs, [&](std::size_t u) {
        const UserRecord& user = *users[u];
        auto bundles = build_bundles(user, cfg.bundle_window, cfg.bundle_stride, cfg.whole_history_bundle);
        if (bundles.empty()) {
            notices[u].push_back("user " + user.user_id + " has no train history; skipped");
            return;
        }
        for (std::size_t j = 0; j < bundles.size(); ++j) {
            auto motive = annotate_bundle(bundles[j], user.metadata, data.items, gateway, cfg.ablation.annotation_on);
            if (!motive) {
                notices[u].push_back("user " + user.user_id + " bundle " + std::to_string(j + 1) +
                                     ": annotation failed; skipped");
                continue;
            }
            MotiveAnnotation m;
            m.user_id = user.user_id;
            m.bundle_index = static_cast<int>(j + 1);
            m.bundle_items = bundles[j].items;
            m.motive_text = std::move(*motive);
            m.time_span = bundles[j].span;
            per_user[u].push_back(std::move(m));
        }
    });

    AnnotationResult result;
    for (std::size_t u = 0; u < users.size(); ++u) {
        const bool had_train = !data.train_items(users[u]->user_id).empty();
        if (!had_train) ++result.users_skipped;
        else if (!per_user[u].empty()) ++result.users_annotated;
        result.bundles_failed += had_train ? notices[u].size() : 0;
        for (auto& n : notices[u]) result.notices.push_back(std::move(n));
        for (auto& m : per_user[u]) result.motives.push_back(std::move(m));
    }

    for (std::size_t start = 0; start < result.motives.size(); start += kEmbedBatch) {
        const std::size_t end = std::min(result.motives.size(), start + kEmbedBatch);
        std::vector<std::string> texts;
        for (std::size_t i = start; i < end; ++i) texts.push_back(result.motives[i].motive_text);
        auto vectors = gateway.embed(texts);
        for (std::size_t i = start; i < end; ++i) result.motives[i].motive_vector = std::move(vectors[i - start]);
    }
    index_motives(result.motives, index);
    return result;
}

MotiveStore group_by_user(const std::vector<MotiveAnnotation>& motives) {
    MotiveStore store;
    for (const auto& m : motives) store[m.user_id].push_back(m);
    for (auto& [user, list] : store) {
        std::sort(list.begin(), list.end(),
                  [](const auto& a, const auto& b) { return a.bundle_index < b.bundle_index; });
    }
    return store;
}

void save_annotations(const std::vector<MotiveAnnotation>& motives, const std::string& path) {
    std::vector<json> records;
    records.reserve(motives.size());
    for (const auto& m : motives) records.emplace_back(m);
    write_file_atomic(path, to_jsonl(records));
}

std::vector<MotiveAnnotation> load_annotations(const std::string& path) {
    std::vector<MotiveAnnotation> out;
    for (const auto& record : read_jsonl(path)) out.push_back(record.get<MotiveAnnotation>());
    return out;
}

void index_motives(const std::vector<MotiveAnnotation>& motives, VectorIndex& index) {
    index.clear_motives();
    for (const auto& m : motives) index.add_motive(m.user_id, m.key(), m.motive_vector);
}

}  // namespace motivrec
