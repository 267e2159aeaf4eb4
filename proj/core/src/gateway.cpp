#include "motivrec/gateway.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <regex>
#include <sstream>
#include <thread>

#include "motivrec/error.hpp"
#include "motivrec/serialize.hpp"
#include "motivrec/text.hpp"

namespace motivrec {
namespace {

constexpr const char* kItemPrompt = R"(You write catalog descriptions for a semantic search index.
Describe the item below in one paragraph: what it is, who it appeals to and why,
its mood, themes and typical context of use. Write so that a person searching in
natural language would find it. Do not contradict the metadata.

Item metadata:
{{metadata}}

Description:
)";

constexpr const char* kAnnotatePrompt = R"(Below are items one user interacted with during a single period, oldest first.
Infer the common underlying reason (the motive) that explains why this user chose
these items together. State it as a searchable preference in one or two
sentences. Do not list the items.

User profile:
{{user_metadata}}

Items:
{{items}}

Motive:
)";

constexpr const char* kQueryPrompt = R"(Write at most {{n}} search queries for a semantic item search engine.
Merge the motives below with the current request. If they conflict, the current
request takes priority. Output only the queries, one per line, with no reasoning.

Current request: {{request}}

Motives:
{{motives}}
)";

constexpr const char* kReflectPrompt = R"(You verify whether retrieved candidates fit a user's current request and motives.
Rate the fit of the candidate list from 0 to 1. If it falls short, rewrite the
queries so that a new search would fix the problems you found.

Current request: {{request}}

Motives:
{{motives}}

Queries used:
{{queries}}

Candidates:
{{candidates}}

Answer in exactly this format:
SCORE: <number between 0 and 1>
FEEDBACK:
<one short paragraph>
QUERIES:
<one query per line>
)";

OutputSchema schema_for(TemplateName name) {
    switch (name) {
        case TemplateName::query: return OutputSchema::query_list;
        case TemplateName::reflect: return OutputSchema::reflect_verdict;
        default: return OutputSchema::free_text;
    }
}

std::string strip_list_marker(const std::string& line) {
    static const std::regex marker(R"(^\s*(?:\d+\s*[.):]|[-*•])\s*)");
    return text::trim(std::regex_replace(line, marker, "", std::regex_constants::format_first_only));
}

bool starts_with_ci(const std::string& line, const std::string& prefix) {
    if (line.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(line[i])) != prefix[i]) return false;
    }
    return true;
}

}  // namespace

std::string to_string(TemplateName name) {
    switch (name) {
        case TemplateName::item: return "item";
        case TemplateName::annotate: return "annotate";
        case TemplateName::query: return "query";
        case TemplateName::reflect: return "reflect";
    }
    return "?";
}

TemplateName template_from_string(const std::string& name) {
    if (name == "item") return TemplateName::item;
    if (name == "annotate") return TemplateName::annotate;
    if (name == "query") return TemplateName::query;
    if (name == "reflect") return TemplateName::reflect;
    throw InputError("unknown template " + name);
}

std::vector<std::string> PromptTemplate::placeholders() const {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = text.find("{{", pos)) != std::string::npos) {
        auto end = text.find("}}", pos + 2);
        if (end == std::string::npos) break;
        out.push_back(text.substr(pos + 2, end - pos - 2));
        pos = end + 2;
    }
    return out;
}

std::string PromptTemplate::render(const Bindings& bindings) const {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        auto open = text.find("{{", pos);
        auto close = open == std::string::npos ? open : text.find("}}", open + 2);
        if (close == std::string::npos) {
            out += text.substr(pos);
            break;
        }
        out += text.substr(pos, open - pos);
        const std::string key = text.substr(open + 2, close - open - 2);
        auto it = bindings.find(key);
        if (it == bindings.end()) {
            throw InputError("template '" + to_string(name) + "' placeholder {{" + key + "}} is unbound");
        }
        if (const auto* s = std::get_if<std::string>(&it->second)) {
            out += *s;
        } else {
            const auto& list = std::get<std::vector<std::string>>(it->second);
            if (list.empty()) out += "(none)";
            for (std::size_t i = 0; i < list.size(); ++i) {
                if (i) out += '\n';
                out += std::to_string(i + 1) + ". " + list[i];
            }
        }
        pos = close + 2;
    }
    return out;
}

std::map<TemplateName, PromptTemplate> default_templates() {
    std::map<TemplateName, PromptTemplate> out;
    for (auto [name, body] : {std::pair{TemplateName::item, kItemPrompt},
                              std::pair{TemplateName::annotate, kAnnotatePrompt},
                              std::pair{TemplateName::query, kQueryPrompt},
                              std::pair{TemplateName::reflect, kReflectPrompt}}) {
        out[name] = PromptTemplate{name, body, schema_for(name)};
    }
    return out;
}

std::map<TemplateName, PromptTemplate> load_templates(const std::string& dir) {
    auto out = default_templates();
    if (dir.empty()) return out;
    if (!std::filesystem::is_directory(dir)) throw InputError("template directory not found: " + dir);
    for (auto& [name, tmpl] : out) {
        const auto path = std::filesystem::path(dir) / (to_string(name) + ".txt");
        if (std::filesystem::exists(path)) tmpl.text = read_file(path.string());
    }
    return out;
}

std::optional<std::vector<std::string>> parse_query_list(const std::string& raw, std::size_t max_queries) {
    std::vector<std::string> out;
    for (const auto& line : text::split_lines(raw)) {
        const std::string trimmed = text::trim(line);
        if (trimmed.empty() || starts_with_ci(trimmed, "QUERIES:")) continue;
        std::string q = strip_list_marker(trimmed);
        if (q.size() >= 2 && q.front() == '"' && q.back() == '"') q = q.substr(1, q.size() - 2);
        if (q.empty()) continue;
        if (out.size() == max_queries) break;
        out.push_back(std::move(q));
    }
    if (out.empty()) return std::nullopt;
    return out;
}

std::optional<ReflectVerdict> parse_reflect_verdict(const std::string& raw, std::size_t max_queries) {
    auto lines = text::split_lines(raw);
    std::size_t i = 0;
    while (i < lines.size() && text::trim(lines[i]).empty()) ++i;
    if (i == lines.size()) return std::nullopt;
    const std::string head = text::trim(lines[i]);
    if (!starts_with_ci(head, "SCORE:")) return std::nullopt;
    ReflectVerdict v;
    try {
        const std::string num = text::trim(head.substr(6));
        std::size_t used = 0;
        v.score = std::stod(num, &used);
        if (used != num.size()) return std::nullopt;
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (!std::isfinite(v.score) || v.score < 0.0 || v.score > 1.0) return std::nullopt;

    enum { none, feedback, queries } block = none;
    std::string query_block;
    for (++i; i < lines.size(); ++i) {
        const std::string t = text::trim(lines[i]);
        if (starts_with_ci(t, "FEEDBACK:")) {
            block = feedback;
            const std::string rest = text::trim(t.substr(9));
            if (!rest.empty()) v.feedback = rest;
            continue;
        }
        if (starts_with_ci(t, "QUERIES:")) {
            block = queries;
            continue;
        }
        if (block == feedback) {
            if (t.empty()) continue;
            if (!v.feedback.empty()) v.feedback += '\n';
            v.feedback += t;
        } else if (block == queries) {
            query_block += t;
            query_block += '\n';
        }
    }
    if (auto q = parse_query_list(query_block, max_queries)) v.refined_queries = std::move(*q);
    return v;
}

std::string format_reflect_verdict(const ReflectVerdict& verdict) {
    std::ostringstream os;
    os.precision(17);
    os << "SCORE: " << verdict.score << "\nFEEDBACK:\n" << verdict.feedback << "\nQUERIES:\n";
    for (std::size_t i = 0; i < verdict.refined_queries.size(); ++i) {
        os << (i + 1) << ". " << verdict.refined_queries[i] << "\n";
    }
    return os.str();
}

Gateway::Gateway(std::shared_ptr<Backend> backend, std::map<TemplateName, PromptTemplate> templates,
                 RetryPolicy retry, int max_in_flight, int max_queries, int max_tokens)
    : backend_(std::move(backend)),
      templates_(std::move(templates)),
      retry_(std::move(retry)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(std::max(max_in_flight, 1))),
      max_queries_(std::max(max_queries, 1)),
      max_tokens_(max_tokens),
      jitter_(retry_.jitter_seed) {
    if (!backend_) throw InputError("gateway needs a backend");
    if (retry_.attempts < 1) retry_.attempts = 1;
    if (!retry_.sleep) {
        retry_.sleep = [](double seconds) {
            std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
        };
    }
    for (auto name : {TemplateName::item, TemplateName::annotate, TemplateName::query, TemplateName::reflect}) {
        if (!templates_.contains(name)) throw InputError("missing template " + to_string(name));
        templates_[name].schema = schema_for(name);
    }
}

void Gateway::backoff(int attempt) {
    double wait = 0.0;
    {
        std::lock_guard lock(mutex_);
        ++stats_.retries;
        const double cap = retry_.initial_backoff_seconds * std::pow(2.0, attempt - 1);
        wait = std::uniform_real_distribution<double>(0.0, cap)(jitter_);
    }
    retry_.sleep(wait);
}

template <typename Fn>
auto Gateway::with_retries(Fn&& fn) -> decltype(fn()) {
    for (int attempt = 1;; ++attempt) {
        try {
            in_flight_->acquire();
            struct Release {
                std::counting_semaphore<>* s;
                ~Release() { s->release(); }
            } release{in_flight_.get()};
            return fn();
        } catch (const TransportError&) {
            {
                std::lock_guard lock(mutex_);
                ++stats_.transport_failures;
            }
            if (attempt >= retry_.attempts) throw;
        }
        backoff(attempt);
    }
}

GenerationResponse Gateway::generate(TemplateName name, const Bindings& bindings) {
    const PromptTemplate& tmpl = templates_.at(name);
    GenerationRequest request{name, tmpl.render(bindings), max_tokens_, bindings};

    GenerationResponse response;
    for (int attempt = 1;; ++attempt) {
        TokenUsage usage;
        response.raw_text = with_retries([&] { return backend_->complete(request, usage); });
        response.attempts = attempt;
        response.usage.prompt_tokens += usage.prompt_tokens;
        response.usage.completion_tokens += usage.completion_tokens;
        response.payload = std::monostate{};
        response.parse_error.clear();
        switch (tmpl.schema) {
            case OutputSchema::free_text: {
                std::string t = text::trim(response.raw_text);
                if (t.empty()) response.parse_error = "empty response";
                else response.payload = std::move(t);
                break;
            }
            case OutputSchema::query_list:
                if (auto q = parse_query_list(response.raw_text, static_cast<std::size_t>(max_queries_))) {
                    response.payload = std::move(*q);
                } else {
                    response.parse_error = "no queries in response";
                }
                break;
            case OutputSchema::reflect_verdict:
                if (auto v = parse_reflect_verdict(response.raw_text, static_cast<std::size_t>(max_queries_))) {
                    response.payload = std::move(*v);
                } else {
                    response.parse_error = "response does not follow the SCORE/FEEDBACK/QUERIES format";
                }
                break;
        }
        {
            std::lock_guard lock(mutex_);
            ++stats_.generations;
            stats_.prompt_tokens += usage.prompt_tokens;
            stats_.completion_tokens += usage.completion_tokens;
            if (!response.parsed()) ++stats_.parse_failures;
        }
        if (response.parsed() || attempt >= retry_.attempts) return response;
        backoff(attempt);
    }
}

std::vector<Vector> Gateway::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw InputError("embed needs at least one text");
    for (const auto& t : texts) {
        if (text::trim(t).empty()) throw InputError("cannot embed empty text");
    }
    auto vectors = with_retries([&] { return backend_->embed(texts); });
    if (vectors.size() != texts.size()) throw TransportError("backend returned a wrong number of embeddings");
    for (auto& v : vectors) {
        if (v.size() != backend_->dimension()) {
            throw DimensionError("embedding of dimension " + std::to_string(v.size()) + ", expected " +
                                 std::to_string(backend_->dimension()));
        }
        v = normalized(std::move(v));
    }
    return vectors;
}

Vector Gateway::embed_one(const std::string& text) { return embed({text}).front(); }

GatewayStats Gateway::stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
}

}  // namespace motivrec
