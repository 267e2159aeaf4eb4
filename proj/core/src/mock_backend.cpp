#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "motivrec/error.hpp"
#include "motivrec/gateway.hpp"
#include "motivrec/text.hpp"

namespace motivrec {
namespace {

struct TokenStat {
    std::string surface;
    std::int64_t docs = 0;
    std::int64_t count = 0;
};

std::int64_t word_count(const std::string& s) {
    std::istringstream in(s);
    std::int64_t n = 0;
    std::string w;
    while (in >> w) ++n;
    return n;
}

const std::string& scalar(const Bindings& b, const std::string& key) {
    static const std::string empty;
    auto it = b.find(key);
    if (it == b.end()) return empty;
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    return empty;
}

std::vector<std::string> list(const Bindings& b, const std::string& key) {
    auto it = b.find(key);
    if (it == b.end()) return {};
    if (const auto* l = std::get_if<std::vector<std::string>>(&it->second)) return *l;
    return {std::get<std::string>(it->second)};
}

/// Per-token document and occurrence counts over `docs`; keeps the first surface form.
std::map<std::string, TokenStat> token_stats(const std::vector<std::string>& docs) {
    std::map<std::string, TokenStat> stats;
    for (const auto& doc : docs) {
        std::set<std::string> seen;
        for (auto& tok : text::tokenize(text::metadata_values(doc))) {
            auto& st = stats[tok.norm];
            if (st.surface.empty()) st.surface = tok.surface;
            ++st.count;
            if (seen.insert(tok.norm).second) ++st.docs;
        }
    }
    return stats;
}

std::vector<const TokenStat*> ranked(const std::map<std::string, TokenStat>& stats, std::int64_t min_docs) {
    std::vector<std::pair<const std::string*, const TokenStat*>> order;
    for (const auto& [norm, st] : stats) {
        if (st.docs >= min_docs) order.emplace_back(&norm, &st);
    }
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second->docs != b.second->docs) return a.second->docs > b.second->docs;
        if (a.second->count != b.second->count) return a.second->count > b.second->count;
        return *a.first < *b.first;
    });
    std::vector<const TokenStat*> out;
    for (const auto& [norm, st] : order) out.push_back(st);
    return out;
}

std::string join_phrase(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out += (i + 1 == words.size()) ? " and " : ", ";
        out += words[i];
    }
    return out;
}

}  // namespace

MockBackend::MockBackend(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw InputError("mock embedding dimension must be positive");
}

void MockBackend::reset_counters() {
    for (auto& c : calls_) c = 0;
    embed_calls_ = 0;
}

std::size_t MockBackend::bucket(const std::string& token) const { return text::fnv1a64(token) % dimension_; }

void MockBackend::observe_corpus(const std::vector<std::string>& documents) {
    document_frequency_.clear();
    corpus_size_ = static_cast<std::int64_t>(documents.size());
    for (const auto& doc : documents) {
        for (const auto& tok : text::token_set(doc)) ++document_frequency_[tok];
    }
}

double MockBackend::idf(const std::string& token, const std::vector<std::string>& fallback_docs) const {
    std::int64_t n = corpus_size_;
    std::int64_t df = 0;
    if (n > 0) {
        auto it = document_frequency_.find(token);
        df = it == document_frequency_.end() ? 0 : it->second;
    } else {
        n = static_cast<std::int64_t>(fallback_docs.size());
        for (const auto& d : fallback_docs) df += text::token_set(d).contains(token) ? 1 : 0;
    }
    return std::log(static_cast<double>(n + 1) / static_cast<double>(df + 1)) + 1.0;
}

std::string MockBackend::complete(const GenerationRequest& request, TokenUsage& usage) {
    ++calls_[static_cast<int>(request.template_name)];
    if (fail_generation && fail_generation(request)) throw TransportError("mock: injected failure");
    std::string out;
    if (override_output) {
        if (auto forced = override_output(request)) out = *forced;
    }
    if (out.empty()) {
        switch (request.template_name) {
            case TemplateName::item: out = describe_item(request.bindings); break;
            case TemplateName::annotate: out = annotate(request.bindings); break;
            case TemplateName::query: out = write_queries(request.bindings); break;
            case TemplateName::reflect: out = reflect(request.bindings); break;
        }
    }
    usage.prompt_tokens = word_count(request.prompt);
    usage.completion_tokens = word_count(out);
    return out;
}

// Echoes the dominant metadata tokens.
std::string MockBackend::describe_item(const Bindings& b) const {
    auto stats = token_stats({scalar(b, "metadata")});
    std::vector<std::string> words;
    for (const TokenStat* st : ranked(stats, 1)) {
        if (words.size() == kItemTokens) break;
        words.push_back(st->surface);
    }
    return join_phrase(words);
}

// Tokens shared by at least two bundle items, most widespread first; falls
// back to the single most frequent token.
std::string MockBackend::annotate(const Bindings& b) const {
    const auto items = list(b, "items");
    auto stats = token_stats(items);
    std::vector<std::string> words;
    for (const TokenStat* st : ranked(stats, items.size() > 1 ? 2 : 1)) {
        if (words.size() == kMotiveTokens) break;
        words.push_back(st->surface);
    }
    if (words.empty()) {
        const TokenStat* best = nullptr;
        for (const auto& [norm, st] : stats) {
            if (!best || st.count > best->count) best = &st;
        }
        if (best) words.push_back(best->surface);
    }
    return join_phrase(words);
}

std::string MockBackend::write_queries(const Bindings& b) const {
    std::size_t n = 1;
    try {
        n = static_cast<std::size_t>(std::max(1, std::stoi(scalar(b, "n"))));
    } catch (const std::exception&) {
    }
    std::vector<std::string> queries;
    for (const auto& motive : list(b, "motives")) {
        if (queries.size() == n) break;
        std::string q = text::truncate_words(motive, kQueryChars);
        if (q.empty() || std::find(queries.begin(), queries.end(), q) != queries.end()) continue;
        queries.push_back(std::move(q));
    }
    const std::string& request = scalar(b, "request");
    if (queries.empty() && !request.empty() && request != "(none)") queries.push_back(request);
    std::string out;
    for (std::size_t i = 0; i < queries.size(); ++i) out += std::to_string(i + 1) + ". " + queries[i] + "\n";
    return out;
}

std::string MockBackend::reflect(const Bindings& b) const {
    auto candidates = list(b, "candidates");
    if (candidates.size() > 10) candidates.resize(10);
    const auto queries = list(b, "queries");
    const auto motives = list(b, "motives");

    std::set<std::string> target;
    for (const auto& q : queries) {
        for (auto& t : text::tokens(q)) target.insert(t);
    }
    std::map<std::string, std::string> motive_tokens;
    for (const auto& m : motives) {
        for (auto& t : text::tokenize(m)) {
            target.insert(t.norm);
            motive_tokens.emplace(t.norm, t.surface);
        }
    }

    std::set<std::string> covered;
    double total = 0.0;
    for (const auto& c : candidates) {
        const auto toks = text::token_set(c);
        covered.insert(toks.begin(), toks.end());
        if (target.empty()) continue;
        std::size_t hit = 0;
        for (const auto& t : target) hit += toks.contains(t) ? 1 : 0;
        total += static_cast<double>(hit) / static_cast<double>(target.size());
    }
    ReflectVerdict verdict;
    verdict.score = candidates.empty() ? 0.0 : total / static_cast<double>(candidates.size());

    const std::pair<const std::string, std::string>* pick = nullptr;
    double pick_idf = 0.0;
    for (const auto& entry : motive_tokens) {
        if (covered.contains(entry.first)) continue;
        const double w = idf(entry.first, candidates);
        if (!pick || w > pick_idf) {
            pick = &entry;
            pick_idf = w;
        }
    }
    for (const auto& q : queries) {
        if (pick && !text::token_set(q).contains(pick->first)) {
            verdict.refined_queries.push_back(q + " " + pick->second);
        } else {
            verdict.refined_queries.push_back(q);
        }
    }
    if (pick) {
        verdict.feedback = "Candidates miss the motive term '" + pick->second + "'.";
    } else {
        verdict.feedback = "Candidates cover every motive term.";
    }
    return format_reflect_verdict(verdict);
}

std::vector<Vector> MockBackend::embed(const std::vector<std::string>& texts) {
    ++embed_calls_;
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        if (fail_embedding && fail_embedding(t)) throw TransportError("mock: injected embedding failure");
        auto toks = text::tokens(t);
        if (toks.empty()) {
            std::string lowered = text::trim(t);
            std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            toks.push_back(lowered);
        }
        Vector v(dimension_, 0.0);
        for (const auto& tok : toks) v[bucket(tok)] += 1.0;
        out.push_back(normalized(std::move(v)));
    }
    return out;
}

}  // namespace motivrec
