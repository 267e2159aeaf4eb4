#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "motivrec/serialize.hpp"
#include "motivrec/types.hpp"

namespace motivrec {

/// Column mapping for a delimited interaction file. Without a header, columns
/// are addressed by 0-based position ("0", "1", ...).
struct InteractionSchema {
    std::string delimiter = "\t";
    bool header = true;
    std::string user_column = "user_id";
    std::string item_column = "item_id";
    std::string rating_column = "rating";  // empty: no rating column
    std::string timestamp_column = "timestamp";

    /// `ratings.dat` layout: `user::item::rating::timestamp`, no header.
    static InteractionSchema movielens();
};

struct RowRejection {
    std::size_t line = 0;
    std::string reason;
};

struct LoadResult {
    std::vector<InteractionEvent> events;
    std::size_t rows = 0;
    std::vector<RowRejection> rejections;
};

LoadResult load_interactions(const std::string& path, const InteractionSchema& schema);
LoadResult parse_interactions(const std::string& contents, const InteractionSchema& schema);

/// Line-delimited JSON records keyed by `item_id`; all other keys become metadata.
std::map<std::string, Metadata> load_item_metadata(const std::string& path);

/// `movies.dat` layout: `id::Title (year)::Genre|Genre`.
std::map<std::string, Metadata> load_movielens_items(const std::string& path);

/// Drops events rated below `min_rating` (unrated events are kept), then
/// prunes users and items with fewer than `min_count` events until nothing changes.
/// Throws EmptyDatasetError when nothing survives.
std::vector<InteractionEvent> apply_core_filter(std::vector<InteractionEvent> events, int min_count,
                                                std::optional<double> min_rating);

struct SplitBoundaries {
    // Exclusive upper bounds: train is ts < train_end, valid is ts < valid_end.
    std::int64_t train_end = 0;
    std::int64_t valid_end = 0;

    bool operator==(const SplitBoundaries&) const = default;
};

struct SplitResult {
    std::vector<InteractionEvent> events;  // global order, every event tagged
    SplitBoundaries boundaries;
};

/// Global chronological split. Cut positions are rounded from the ratios and
/// then extended to the end of their timestamp tie group.
SplitResult chronological_split(std::vector<InteractionEvent> events,
                                std::array<double, 3> ratios = {0.8, 0.1, 0.1});

SplitTag tag_for(std::int64_t timestamp, const SplitBoundaries& boundaries);

struct DatasetBundle {
    std::map<std::string, UserRecord> users;
    std::map<std::string, ItemRecord> items;
    SplitBoundaries boundaries;

    std::size_t interaction_count() const;
    std::vector<InteractionEvent> events() const;
    std::vector<InteractionEvent> events_in(SplitTag tag) const;
    /// Train-split item ids of one user.
    std::vector<std::string> train_items(const std::string& user_id) const;

    bool operator==(const DatasetBundle&) const = default;
};

/// Sets popularity to the train-split count; unseen items get 0.
void compute_popularity(const std::vector<InteractionEvent>& train_events,
                        std::map<std::string, ItemRecord>& items);

/// Groups tagged events per user, attaches metadata (items lacking a record
/// get `{item_id: <id>}`), and computes popularity.
DatasetBundle assemble_dataset(const SplitResult& split, const std::map<std::string, Metadata>& item_metadata,
                               const std::map<std::string, Metadata>& user_metadata = {});

struct DatasetStats {
    std::size_t users = 0;
    std::size_t items = 0;
    std::size_t interactions = 0;
    std::size_t train = 0;
    std::size_t valid = 0;
    std::size_t test = 0;
    double density() const;
};

DatasetStats dataset_stats(const DatasetBundle& data);

json dataset_to_json(const DatasetBundle& data);
DatasetBundle dataset_from_json(const json& j);
void save_dataset(const DatasetBundle& data, const std::string& path);
DatasetBundle load_dataset(const std::string& path);

}  // namespace motivrec
