#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace motivrec {

using Metadata = std::map<std::string, std::string>;
using Vector = std::vector<double>;

enum class SplitTag { unassigned, train, valid, test };

std::string to_string(SplitTag tag);
SplitTag split_tag_from_string(const std::string& text);

struct ItemRecord {
    std::string item_id;
    Metadata raw_metadata;
    std::optional<std::string> description;
    std::optional<std::string> augmented_text;
    std::optional<Vector> embedding;
    std::int64_t popularity = 0;

    bool operator==(const ItemRecord&) const = default;
};

struct InteractionEvent {
    std::string user_id;
    std::string item_id;
    std::optional<double> rating;
    std::int64_t timestamp = 0;
    SplitTag split = SplitTag::unassigned;

    bool operator==(const InteractionEvent&) const = default;
};

/// Per-user history order: timestamp, then item id.
bool history_before(const InteractionEvent& a, const InteractionEvent& b);

/// Global order used for splitting: timestamp, user id, item id.
bool global_before(const InteractionEvent& a, const InteractionEvent& b);

struct UserRecord {
    std::string user_id;
    Metadata metadata;
    std::vector<InteractionEvent> history;

    bool operator==(const UserRecord&) const = default;
};

struct TimeSpan {
    std::int64_t first_ts = 0;
    std::int64_t last_ts = 0;

    bool operator==(const TimeSpan&) const = default;
};

struct MotiveAnnotation {
    std::string user_id;
    int bundle_index = 0;  // 1-based, ordered by time_span.first_ts
    std::vector<std::string> bundle_items;
    std::string motive_text;
    Vector motive_vector;
    TimeSpan time_span;

    /// Index key, unique across all users.
    std::string key() const;

    bool operator==(const MotiveAnnotation&) const = default;
};

std::string motive_key(const std::string& user_id, int bundle_index);

/// Scales `v` to unit L2 norm. Zero vectors are returned unchanged.
Vector normalized(Vector v);
double l2_norm(const Vector& v);
double dot(const Vector& a, const Vector& b);
bool is_unit(const Vector& v, double tol = 1e-6);

}  // namespace motivrec
