#pragma once

#include <map>
#include <string>
#include <vector>

#include "motivrec/gateway.hpp"
#include "motivrec/types.hpp"
#include "motivrec/vector_index.hpp"

namespace motivrec {

struct AugmentOptions {
    std::string cache_dir;  // empty: no cache
    bool resume = false;    // read cached descriptions
    int jobs = 1;
};

struct AugmentResult {
    ItemRecord item;
    bool degraded = false;
    bool from_cache = false;
    std::string error;
};

/// Generates the item description and the augmented text [metadata; description].
/// A failed generation degrades to augmented_text = serialized metadata with no
/// description. Throws InputError for an item without metadata.
AugmentResult augment_item(const ItemRecord& item, Gateway& gateway);

struct AugmentReport {
    std::size_t succeeded = 0;
    std::size_t degraded = 0;
    std::size_t cached = 0;
    std::vector<std::string> degraded_items;
};

/// Augments every item, embeds it (description, or augmented text when
/// degraded) and fills the items namespace. Throws when every item failed.
AugmentReport build_item_index(std::map<std::string, ItemRecord>& items, Gateway& gateway, VectorIndex& index,
                               const AugmentOptions& options = {});

/// Cache key for an item's metadata under the current item prompt.
std::string augmentation_cache_key(const ItemRecord& item, const PromptTemplate& prompt);

}  // namespace motivrec
