#include "motivrec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "motivrec/error.hpp"
#include "motivrec/text.hpp"

namespace motivrec {
namespace {

std::vector<std::string> split_fields(const std::string& line, const std::string& delimiter) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delimiter, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + delimiter.size();
    }
    return out;
}

std::optional<std::int64_t> parse_timestamp(const std::string& field) {
    const std::string t = text::trim(field);
    if (t.empty()) return std::nullopt;
    std::int64_t value = 0;
    std::size_t used = 0;
    try {
        value = std::stoll(t, &used);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (used != t.size() || value < 0) return std::nullopt;
    return value;
}

std::optional<double> parse_rating(const std::string& field) {
    const std::string t = text::trim(field);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &used);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (used != t.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name, bool has_header) {
    if (!has_header) {
        try {
            return static_cast<std::size_t>(std::stoul(name));
        } catch (const std::exception&) {
            throw InputError("column '" + name + "' must be a position when the file has no header");
        }
    }
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

InteractionSchema InteractionSchema::movielens() {
    InteractionSchema s;
    s.delimiter = "::";
    s.header = false;
    s.user_column = "0";
    s.item_column = "1";
    s.rating_column = "2";
    s.timestamp_column = "3";
    return s;
}

LoadResult parse_interactions(const std::string& contents, const InteractionSchema& schema) {
    if (schema.delimiter.empty()) throw InputError("empty delimiter");
    auto lines = text::split_lines(contents);
    std::size_t first = 0;
    std::vector<std::string> header;
    if (schema.header) {
        if (lines.empty()) throw InputError("interaction file has no header");
        for (auto& h : split_fields(lines[0], schema.delimiter)) header.push_back(text::trim(h));
        first = 1;
    }
    const std::size_t user_col = column_index(header, schema.user_column, schema.header);
    const std::size_t item_col = column_index(header, schema.item_column, schema.header);
    const std::size_t ts_col = column_index(header, schema.timestamp_column, schema.header);
    std::optional<std::size_t> rating_col;
    if (!schema.rating_column.empty()) {
        if (!schema.header || std::find(header.begin(), header.end(), schema.rating_column) != header.end()) {
            rating_col = column_index(header, schema.rating_column, schema.header);
        }
    }
    const std::size_t needed = std::max({user_col, item_col, ts_col, rating_col.value_or(0)}) + 1;

    LoadResult result;
    for (std::size_t i = first; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (text::trim(lines[i]).empty()) continue;
        ++result.rows;
        auto fields = split_fields(lines[i], schema.delimiter);
        if (fields.size() < needed) {
            result.rejections.push_back({line_no, "expected " + std::to_string(needed) + " fields"});
            continue;
        }
        InteractionEvent ev;
        ev.user_id = text::trim(fields[user_col]);
        ev.item_id = text::trim(fields[item_col]);
        if (ev.user_id.empty() || ev.item_id.empty()) {
            result.rejections.push_back({line_no, "empty user or item field"});
            continue;
        }
        auto ts = parse_timestamp(fields[ts_col]);
        if (!ts) {
            result.rejections.push_back({line_no, "unparsable timestamp '" + fields[ts_col] + "'"});
            continue;
        }
        ev.timestamp = *ts;
        if (rating_col && !text::trim(fields[*rating_col]).empty()) {
            auto r = parse_rating(fields[*rating_col]);
            if (!r) {
                result.rejections.push_back({line_no, "unparsable rating '" + fields[*rating_col] + "'"});
                continue;
            }
            ev.rating = r;
        }
        result.events.push_back(std::move(ev));
    }
    return result;
}

LoadResult load_interactions(const std::string& path, const InteractionSchema& schema) {
    return parse_interactions(read_file(path), schema);
}

std::map<std::string, Metadata> load_item_metadata(const std::string& path) {
    std::map<std::string, Metadata> out;
    for (const auto& record : read_jsonl(path)) {
        if (!record.is_object() || !record.contains("item_id")) {
            throw InputError(path + ": item record without item_id");
        }
        const auto& id_field = record.at("item_id");
        std::string id = id_field.is_string() ? id_field.get<std::string>() : id_field.dump();
        Metadata meta;
        for (const auto& [key, value] : record.items()) {
            if (key == "item_id" || value.is_null()) continue;
            meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
        }
        out[std::move(id)] = std::move(meta);
    }
    return out;
}

std::map<std::string, Metadata> load_movielens_items(const std::string& path) {
    std::map<std::string, Metadata> out;
    for (const auto& line : text::split_lines(read_file(path))) {
        if (text::trim(line).empty()) continue;
        auto fields = split_fields(line, "::");
        if (fields.size() < 3) throw InputError(path + ": malformed movie line '" + line + "'");
        out[text::trim(fields[0])] = Metadata{{"title", text::trim(fields[1])}, {"genres", text::trim(fields[2])}};
    }
    return out;
}

std::vector<InteractionEvent> apply_core_filter(std::vector<InteractionEvent> events, int min_count,
                                                std::optional<double> min_rating) {
    if (events.empty()) throw EmptyDatasetError("no interactions to filter");
    if (min_rating) {
        std::erase_if(events, [&](const InteractionEvent& e) { return e.rating && *e.rating < *min_rating; });
    }
    const auto threshold = static_cast<std::size_t>(std::max(min_count, 0));
    while (!events.empty()) {
        std::unordered_map<std::string, std::size_t> user_count;
        std::unordered_map<std::string, std::size_t> item_count;
        for (const auto& e : events) {
            ++user_count[e.user_id];
            ++item_count[e.item_id];
        }
        const std::size_t before = events.size();
        std::erase_if(events, [&](const InteractionEvent& e) {
            return user_count[e.user_id] < threshold || item_count[e.item_id] < threshold;
        });
        if (events.size() == before) break;
    }
    if (events.empty()) throw EmptyDatasetError("filtering removed every interaction");
    return events;
}

SplitTag tag_for(std::int64_t timestamp, const SplitBoundaries& b) {
    if (timestamp < b.train_end) return SplitTag::train;
    if (timestamp < b.valid_end) return SplitTag::valid;
    return SplitTag::test;
}

SplitResult chronological_split(std::vector<InteractionEvent> events, std::array<double, 3> ratios) {
    const std::size_t n = events.size();
    if (n < 3) throw EmptyDatasetError("need at least 3 interactions for a three-way split");
    const double total = ratios[0] + ratios[1] + ratios[2];
    if (!(total > 0.0) || ratios[0] <= 0.0 || ratios[1] <= 0.0 || ratios[2] <= 0.0) {
        throw InputError("split ratios must be positive");
    }
    std::sort(events.begin(), events.end(), global_before);

    auto extend = [&](std::size_t cut) {
        while (cut < n && cut > 0 && events[cut].timestamp == events[cut - 1].timestamp) ++cut;
        return cut;
    };
    auto target = [&](double fraction) {
        return static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction / total));
    };
    std::size_t train_cut = extend(std::max<std::size_t>(target(ratios[0]), 1));
    std::size_t valid_cut = std::max(target(ratios[0] + ratios[1]), train_cut + 1);
    valid_cut = extend(valid_cut);
    if (train_cut >= n || valid_cut >= n) {
        throw EmptyDatasetError("timestamp ties leave no room for non-empty valid and test splits");
    }

    SplitResult result;
    result.boundaries = {events[train_cut].timestamp, events[valid_cut].timestamp};
    for (auto& e : events) e.split = tag_for(e.timestamp, result.boundaries);
    result.events = std::move(events);
    return result;
}

void compute_popularity(const std::vector<InteractionEvent>& train_events,
                        std::map<std::string, ItemRecord>& items) {
    for (auto& [id, item] : items) item.popularity = 0;
    for (const auto& e : train_events) {
        if (auto it = items.find(e.item_id); it != items.end()) ++it->second.popularity;
    }
}

DatasetBundle assemble_dataset(const SplitResult& split, const std::map<std::string, Metadata>& item_metadata,
                               const std::map<std::string, Metadata>& user_metadata) {
    DatasetBundle data;
    data.boundaries = split.boundaries;
    std::vector<InteractionEvent> train;
    for (const auto& e : split.events) {
        auto& user = data.users[e.user_id];
        user.user_id = e.user_id;
        user.history.push_back(e);
        if (!data.items.contains(e.item_id)) {
            ItemRecord item;
            item.item_id = e.item_id;
            if (auto it = item_metadata.find(e.item_id); it != item_metadata.end() && !it->second.empty()) {
                item.raw_metadata = it->second;
            } else {
                item.raw_metadata = {{"item_id", e.item_id}};
            }
            data.items.emplace(e.item_id, std::move(item));
        }
        if (e.split == SplitTag::train) train.push_back(e);
    }
    for (auto& [id, user] : data.users) {
        std::sort(user.history.begin(), user.history.end(), history_before);
        if (auto it = user_metadata.find(id); it != user_metadata.end()) user.metadata = it->second;
    }
    compute_popularity(train, data.items);
    return data;
}

std::size_t DatasetBundle::interaction_count() const {
    std::size_t n = 0;
    for (const auto& [id, user] : users) n += user.history.size();
    return n;
}

std::vector<InteractionEvent> DatasetBundle::events() const {
    std::vector<InteractionEvent> out;
    for (const auto& [id, user] : users) out.insert(out.end(), user.history.begin(), user.history.end());
    std::sort(out.begin(), out.end(), global_before);
    return out;
}

std::vector<InteractionEvent> DatasetBundle::events_in(SplitTag tag) const {
    std::vector<InteractionEvent> out;
    for (const auto& [id, user] : users) {
        for (const auto& e : user.history) {
            if (e.split == tag) out.push_back(e);
        }
    }
    std::sort(out.begin(), out.end(), global_before);
    return out;
}

std::vector<std::string> DatasetBundle::train_items(const std::string& user_id) const {
    std::vector<std::string> out;
    if (auto it = users.find(user_id); it != users.end()) {
        for (const auto& e : it->second.history) {
            if (e.split == SplitTag::train) out.push_back(e.item_id);
        }
    }
    return out;
}

double DatasetStats::density() const {
    if (users == 0 || items == 0) return 0.0;
    return static_cast<double>(interactions) / (static_cast<double>(users) * static_cast<double>(items));
}

DatasetStats dataset_stats(const DatasetBundle& data) {
    DatasetStats s;
    s.users = data.users.size();
    s.items = data.items.size();
    for (const auto& [id, user] : data.users) {
        for (const auto& e : user.history) {
            ++s.interactions;
            if (e.split == SplitTag::train) ++s.train;
            else if (e.split == SplitTag::valid) ++s.valid;
            else if (e.split == SplitTag::test) ++s.test;
        }
    }
    return s;
}

json dataset_to_json(const DatasetBundle& data) {
    json users = json::array();
    for (const auto& [id, user] : data.users) users.push_back(user);
    json items = json::array();
    for (const auto& [id, item] : data.items) items.push_back(item);
    return json{{"format", "motivrec-dataset/1"},
                {"train_end", data.boundaries.train_end},
                {"valid_end", data.boundaries.valid_end},
                {"users", std::move(users)},
                {"items", std::move(items)}};
}

DatasetBundle dataset_from_json(const json& j) {
    if (j.value("format", std::string()) != "motivrec-dataset/1") {
        throw InputError("not a dataset file (bad format tag)");
    }
    DatasetBundle data;
    data.boundaries = {j.at("train_end").get<std::int64_t>(), j.at("valid_end").get<std::int64_t>()};
    for (const auto& u : j.at("users")) {
        auto user = u.get<UserRecord>();
        data.users.emplace(user.user_id, std::move(user));
    }
    for (const auto& i : j.at("items")) {
        auto item = i.get<ItemRecord>();
        data.items.emplace(item.item_id, std::move(item));
    }
    return data;
}

void save_dataset(const DatasetBundle& data, const std::string& path) {
    write_file_atomic(path, dataset_to_json(data).dump() + "\n");
}

DatasetBundle load_dataset(const std::string& path) {
    try {
        return dataset_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

}  // namespace motivrec
