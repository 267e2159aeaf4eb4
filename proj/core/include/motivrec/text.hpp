#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "motivrec/types.hpp"

namespace motivrec::text {

struct Token {
    std::string norm;     // lower-cased matching form
    std::string surface;  // as written
};

/// Splits on anything that is not alphanumeric, '-' or '\''; drops stopwords.
std::vector<Token> tokenize(std::string_view input);

/// Normalized tokens only.
std::vector<std::string> tokens(std::string_view input);
std::set<std::string> token_set(std::string_view input);

bool is_stopword(std::string_view norm);

/// "key: value" lines in key order.
std::string serialize_metadata(const Metadata& metadata);

/// Strips a leading "key: " from each line; keeps lines without a key as-is.
std::string metadata_values(std::string_view serialized);

/// [M; D] with a blank-line separator.
std::string augment(const Metadata& metadata, const std::string& description);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

/// Cuts at a word boundary so the result has at most `max_chars` characters.
std::string truncate_words(std::string_view input, std::size_t max_chars);

std::string trim(std::string_view input);
std::vector<std::string> split_lines(std::string_view input);

}  // namespace motivrec::text
