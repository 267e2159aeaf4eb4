#include "motivrec/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>

namespace motivrec::text {
namespace {

constexpr std::array<std::string_view, 40> kStopwords = {
    "a",    "about", "an",   "and",  "are",  "as",   "at",    "be",   "by",   "for",
    "from", "has",   "have", "he",   "her",  "his",  "i",     "in",   "is",   "it",
    "its",  "me",    "my",   "of",   "on",   "or",   "our",   "she",  "so",   "that",
    "the",  "their", "them", "they", "this", "to",   "was",   "were", "with", "you",
};

bool is_token_char(unsigned char c) { return std::isalnum(c) || c == '-' || c == '\''; }

}  // namespace

bool is_stopword(std::string_view norm) {
    return std::binary_search(kStopwords.begin(), kStopwords.end(), norm);
}

std::vector<Token> tokenize(std::string_view input) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < input.size()) {
        while (i < input.size() && !is_token_char(static_cast<unsigned char>(input[i]))) ++i;
        std::size_t j = i;
        while (j < input.size() && is_token_char(static_cast<unsigned char>(input[j]))) ++j;
        std::string_view raw = input.substr(i, j - i);
        i = j;
        while (!raw.empty() && (raw.front() == '-' || raw.front() == '\'')) raw.remove_prefix(1);
        while (!raw.empty() && (raw.back() == '-' || raw.back() == '\'')) raw.remove_suffix(1);
        if (raw.empty()) continue;
        std::string norm(raw);
        std::transform(norm.begin(), norm.end(), norm.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (is_stopword(norm)) continue;
        out.push_back({std::move(norm), std::string(raw)});
    }
    return out;
}

std::vector<std::string> tokens(std::string_view input) {
    std::vector<std::string> out;
    for (auto& t : tokenize(input)) out.push_back(std::move(t.norm));
    return out;
}

std::set<std::string> token_set(std::string_view input) {
    auto toks = tokens(input);
    return {toks.begin(), toks.end()};
}

std::string serialize_metadata(const Metadata& metadata) {
    std::string out;
    for (const auto& [key, value] : metadata) {
        if (!out.empty()) out += '\n';
        out += key;
        out += ": ";
        out += value;
    }
    return out;
}

std::string metadata_values(std::string_view serialized) {
    std::string out;
    for (const auto& line : split_lines(serialized)) {
        std::string_view view(line);
        if (auto pos = view.find(": "); pos != std::string_view::npos &&
                                        view.substr(0, pos).find(' ') == std::string_view::npos) {
            view.remove_prefix(pos + 2);
        }
        if (!out.empty()) out += '\n';
        out += view;
    }
    return out;
}

std::string augment(const Metadata& metadata, const std::string& description) {
    return serialize_metadata(metadata) + "\n\n" + description;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string truncate_words(std::string_view input, std::size_t max_chars) {
    if (input.size() <= max_chars) return std::string(input);
    std::string_view cut = input.substr(0, max_chars);
    if (!is_token_char(static_cast<unsigned char>(input[max_chars]))) return trim(cut);
    if (auto pos = cut.find_last_of(" \t\n"); pos != std::string_view::npos && pos > 0) {
        cut = cut.substr(0, pos);
    }
    return trim(cut);
}

std::string trim(std::string_view input) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!input.empty() && is_space(input.front())) input.remove_prefix(1);
    while (!input.empty() && is_space(input.back())) input.remove_suffix(1);
    return std::string(input);
}

std::vector<std::string> split_lines(std::string_view input) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= input.size()) {
        auto end = input.find('\n', start);
        if (end == std::string_view::npos) end = input.size();
        std::string_view line = input.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.emplace_back(line);
        start = end + 1;
    }
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

}  // namespace motivrec::text
