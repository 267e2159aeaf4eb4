#include "motivrec/augmenter.hpp"

#include <filesystem>

#include "motivrec/error.hpp"
#include "motivrec/parallel.hpp"
#include "motivrec/serialize.hpp"
#include "motivrec/text.hpp"

namespace motivrec {
namespace {

constexpr std::size_t kEmbedBatch = 64;

std::filesystem::path cache_path(const std::string& dir, const std::string& key) {
    return std::filesystem::path(dir) / (key + ".json");
}

}  // namespace

std::string augmentation_cache_key(const ItemRecord& item, const PromptTemplate& prompt) {
    return text::hex64(text::fnv1a64(text::serialize_metadata(item.raw_metadata) + '\x1f' + prompt.text));
}

AugmentResult augment_item(const ItemRecord& item, Gateway& gateway) {
    if (item.raw_metadata.empty()) throw InputError("item " + item.item_id + " has no metadata");
    AugmentResult result;
    result.item = item;
    const std::string serialized = text::serialize_metadata(item.raw_metadata);
    try {
        auto response = gateway.generate(TemplateName::item, {{"metadata", serialized}});
        if (response.parsed()) {
            result.item.description = response.text();
            result.item.augmented_text = text::augment(item.raw_metadata, response.text());
            return result;
        }
        result.error = response.parse_error;
    } catch (const TransportError& e) {
        result.error = e.what();
    }
    result.degraded = true;
    result.item.description.reset();
    result.item.augmented_text = serialized;
    return result;
}

AugmentReport build_item_index(std::map<std::string, ItemRecord>& items, Gateway& gateway, VectorIndex& index,
                               const AugmentOptions& options) {
    if (items.empty()) throw InputError("no items to index");
    if (index.dimension() != gateway.backend().dimension()) {
        throw DimensionError("index dimension " + std::to_string(index.dimension()) + " does not match backend " +
                             std::to_string(gateway.backend().dimension()));
    }
    std::vector<ItemRecord*> order;
    for (auto& [id, item] : items) order.push_back(&item);

    const PromptTemplate& prompt = gateway.prompt(TemplateName::item);
    if (!options.cache_dir.empty()) std::filesystem::create_directories(options.cache_dir);

    std::vector<AugmentResult> results(order.size());
    parallel_for(order.size(), options.jobs, [&](std::size_t i) {
        const ItemRecord& item = *order[i];
        const std::string key = options.cache_dir.empty() ? "" : augmentation_cache_key(item, prompt);
        if (options.resume && !key.empty()) {
            const auto path = cache_path(options.cache_dir, key);
            if (std::filesystem::exists(path)) {
                const auto cached = json::parse(read_file(path.string()));
                if (cached.value("key", "") == key) {
                    results[i].item = item;
                    const std::string description = cached.at("description").get<std::string>();
                    results[i].item.description = description;
                    results[i].item.augmented_text = text::augment(item.raw_metadata, description);
                    results[i].from_cache = true;
                    return;
                }
            }
        }
        results[i] = augment_item(item, gateway);
        if (!results[i].degraded && !key.empty()) {
            json record{{"key", key}, {"item_id", item.item_id}, {"description", *results[i].item.description}};
            write_file_atomic(cache_path(options.cache_dir, key).string(), record.dump() + "\n");
        }
    });

    AugmentReport report;
    for (const auto& r : results) {
        if (r.degraded) {
            ++report.degraded;
            report.degraded_items.push_back(r.item.item_id);
        } else {
            ++report.succeeded;
            if (r.from_cache) ++report.cached;
        }
    }
    if (report.succeeded == 0) throw Error("every item failed augmentation");

    for (std::size_t start = 0; start < results.size(); start += kEmbedBatch) {
        const std::size_t end = std::min(results.size(), start + kEmbedBatch);
        std::vector<std::string> texts;
        for (std::size_t i = start; i < end; ++i) {
            const auto& item = results[i].item;
            texts.push_back(item.description ? *item.description : *item.augmented_text);
        }
        auto vectors = gateway.embed(texts);
        for (std::size_t i = start; i < end; ++i) results[i].item.embedding = std::move(vectors[i - start]);
    }

    for (std::size_t i = 0; i < results.size(); ++i) {
        *order[i] = std::move(results[i].item);
        index.add_item(order[i]->item_id, *order[i]->embedding);
    }
    return report;
}

}  // namespace motivrec
