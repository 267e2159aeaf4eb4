#include "motivrec/serialize.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "motivrec/error.hpp"
#include "motivrec/text.hpp"

namespace motivrec {

void to_json(json& j, const ItemRecord& item) {
    j = json{{"item_id", item.item_id}, {"raw_metadata", item.raw_metadata}, {"popularity", item.popularity}};
    if (item.description) j["description"] = *item.description;
    if (item.augmented_text) j["augmented_text"] = *item.augmented_text;
    if (item.embedding) j["embedding"] = *item.embedding;
}

void from_json(const json& j, ItemRecord& item) {
    item = ItemRecord{};
    j.at("item_id").get_to(item.item_id);
    if (j.contains("raw_metadata")) j.at("raw_metadata").get_to(item.raw_metadata);
    if (j.contains("description")) item.description = j.at("description").get<std::string>();
    if (j.contains("augmented_text")) item.augmented_text = j.at("augmented_text").get<std::string>();
    if (j.contains("embedding")) item.embedding = j.at("embedding").get<Vector>();
    item.popularity = j.value("popularity", std::int64_t{0});
}

void to_json(json& j, const InteractionEvent& event) {
    j = json{{"user_id", event.user_id},
             {"item_id", event.item_id},
             {"timestamp", event.timestamp},
             {"split", to_string(event.split)}};
    j["rating"] = event.rating ? json(*event.rating) : json(nullptr);
}

void from_json(const json& j, InteractionEvent& event) {
    event = InteractionEvent{};
    j.at("user_id").get_to(event.user_id);
    j.at("item_id").get_to(event.item_id);
    j.at("timestamp").get_to(event.timestamp);
    if (j.contains("rating") && !j.at("rating").is_null()) event.rating = j.at("rating").get<double>();
    event.split = split_tag_from_string(j.value("split", std::string("unassigned")));
}

void to_json(json& j, const UserRecord& user) {
    j = json{{"user_id", user.user_id}, {"metadata", user.metadata}, {"history", user.history}};
}

void from_json(const json& j, UserRecord& user) {
    user = UserRecord{};
    j.at("user_id").get_to(user.user_id);
    if (j.contains("metadata")) j.at("metadata").get_to(user.metadata);
    if (j.contains("history")) j.at("history").get_to(user.history);
}

void to_json(json& j, const MotiveAnnotation& motive) {
    j = json{{"user_id", motive.user_id},
             {"bundle_index", motive.bundle_index},
             {"bundle_items", motive.bundle_items},
             {"motive_text", motive.motive_text},
             {"motive_vector", motive.motive_vector},
             {"first_ts", motive.time_span.first_ts},
             {"last_ts", motive.time_span.last_ts}};
}

void from_json(const json& j, MotiveAnnotation& motive) {
    motive = MotiveAnnotation{};
    j.at("user_id").get_to(motive.user_id);
    j.at("bundle_index").get_to(motive.bundle_index);
    j.at("bundle_items").get_to(motive.bundle_items);
    j.at("motive_text").get_to(motive.motive_text);
    j.at("motive_vector").get_to(motive.motive_vector);
    j.at("first_ts").get_to(motive.time_span.first_ts);
    j.at("last_ts").get_to(motive.time_span.last_ts);
}

void to_json(json& j, const PipelineConfig& cfg) { j = format_config(cfg); }

void from_json(const json& j, PipelineConfig& cfg) { cfg = parse_config(j.get<std::string>()); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        out << contents;
        if (!out) throw InputError("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::vector<json> read_jsonl(const std::string& path) {
    std::vector<json> out;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(read_file(path))) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string to_jsonl(const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

}  // namespace motivrec
