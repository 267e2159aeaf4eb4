#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "motivrec/config.hpp"
#include "motivrec/types.hpp"

namespace motivrec {

using json = nlohmann::json;

void to_json(json& j, const ItemRecord& item);
void from_json(const json& j, ItemRecord& item);
void to_json(json& j, const InteractionEvent& event);
void from_json(const json& j, InteractionEvent& event);
void to_json(json& j, const UserRecord& user);
void from_json(const json& j, UserRecord& user);
void to_json(json& j, const MotiveAnnotation& motive);
void from_json(const json& j, MotiveAnnotation& motive);
void to_json(json& j, const PipelineConfig& cfg);
void from_json(const json& j, PipelineConfig& cfg);

/// Reads a whole file; throws InputError when it cannot be opened.
std::string read_file(const std::string& path);

/// Writes via a temporary file and rename so readers never see a partial file.
void write_file_atomic(const std::string& path, const std::string& contents);

/// One compact JSON document per line.
std::vector<json> read_jsonl(const std::string& path);
std::string to_jsonl(const std::vector<json>& records);

}  // namespace motivrec
