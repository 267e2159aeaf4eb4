#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <string>
#include <variant>
#include <vector>

#include "motivrec/types.hpp"

namespace motivrec {

enum class TemplateName { item, annotate, query, reflect };
enum class OutputSchema { free_text, query_list, reflect_verdict };

std::string to_string(TemplateName name);
TemplateName template_from_string(const std::string& name);

using Binding = std::variant<std::string, std::vector<std::string>>;
using Bindings = std::map<std::string, Binding>;

/// Prompt text with `{{name}}` placeholders. List bindings render as one
/// numbered line per element.
struct PromptTemplate {
    TemplateName name = TemplateName::item;
    std::string text;
    OutputSchema schema = OutputSchema::free_text;

    std::vector<std::string> placeholders() const;
    /// Throws InputError naming the first unbound placeholder.
    std::string render(const Bindings& bindings) const;
};

/// The four shipped prompts. `load_templates` overrides any of them from
/// `<dir>/<name>.txt` when present.
std::map<TemplateName, PromptTemplate> default_templates();
std::map<TemplateName, PromptTemplate> load_templates(const std::string& dir);

struct GenerationRequest {
    TemplateName template_name = TemplateName::item;
    std::string prompt;
    int max_tokens = 512;
    Bindings bindings;
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct ReflectVerdict {
    double score = 0.0;
    std::string feedback;
    std::vector<std::string> refined_queries;

    bool operator==(const ReflectVerdict&) const = default;
};

using ParsedPayload = std::variant<std::monostate, std::string, std::vector<std::string>, ReflectVerdict>;

struct GenerationResponse {
    std::string raw_text;
    ParsedPayload payload;  // monostate marks a parse failure; raw_text is kept
    std::string parse_error;
    TokenUsage usage;
    int attempts = 0;

    bool parsed() const { return !std::holds_alternative<std::monostate>(payload); }
    const std::string& text() const { return std::get<std::string>(payload); }
    const std::vector<std::string>& queries() const { return std::get<std::vector<std::string>>(payload); }
    const ReflectVerdict& verdict() const { return std::get<ReflectVerdict>(payload); }
};

/// One query per line; numbering and bullets are stripped, blank lines
/// skipped, at most `max_queries` kept. nullopt when nothing remains.
std::optional<std::vector<std::string>> parse_query_list(const std::string& raw, std::size_t max_queries);

/// `SCORE: <float>` line, then `FEEDBACK:` and `QUERIES:` blocks. The score
/// must lie in [0, 1].
std::optional<ReflectVerdict> parse_reflect_verdict(const std::string& raw, std::size_t max_queries);

std::string format_reflect_verdict(const ReflectVerdict& verdict);

/// Raw model access. Implementations must tolerate concurrent calls and throw
/// TransportError for retryable failures.
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string complete(const GenerationRequest& request, TokenUsage& usage) = 0;
    virtual std::vector<Vector> embed(const std::vector<std::string>& texts) = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string name() const = 0;
};

/// Deterministic offline backend. Generation is driven by the request's
/// bindings, embeddings are hashed bags of tokens.
class MockBackend : public Backend {
public:
    explicit MockBackend(std::size_t dimension = 256);

    std::string complete(const GenerationRequest& request, TokenUsage& usage) override;
    std::vector<Vector> embed(const std::vector<std::string>& texts) override;
    std::size_t dimension() const override { return dimension_; }
    std::string name() const override { return "mock"; }

    /// Document frequencies used to rank refinement tokens. Without a corpus
    /// the shown candidates stand in for it.
    void observe_corpus(const std::vector<std::string>& documents);

    /// Bucket a normalized token hashes to.
    std::size_t bucket(const std::string& token) const;

    // Test hooks.
    std::function<bool(const GenerationRequest&)> fail_generation;
    std::function<bool(const std::string&)> fail_embedding;
    std::function<std::optional<std::string>(const GenerationRequest&)> override_output;

    std::int64_t calls(TemplateName name) const { return calls_[static_cast<int>(name)].load(); }
    std::int64_t embed_calls() const { return embed_calls_.load(); }
    void reset_counters();

    static constexpr std::size_t kItemTokens = 8;
    static constexpr std::size_t kMotiveTokens = 3;
    static constexpr std::size_t kQueryChars = 64;

private:
    std::string describe_item(const Bindings& b) const;
    std::string annotate(const Bindings& b) const;
    std::string write_queries(const Bindings& b) const;
    std::string reflect(const Bindings& b) const;
    double idf(const std::string& token, const std::vector<std::string>& fallback_docs) const;

    std::size_t dimension_;
    std::array<std::atomic<std::int64_t>, 4> calls_{};
    std::atomic<std::int64_t> embed_calls_{0};
    std::map<std::string, std::int64_t> document_frequency_;
    std::int64_t corpus_size_ = 0;
};

/// OpenAI-style chat-completions and embeddings endpoints over HTTP(S).
struct HttpBackendOptions {
    std::string base_url;  // scheme://host[:port]
    std::string chat_path = "/v1/chat/completions";
    std::string embed_path = "/v1/embeddings";
    std::string chat_model;
    std::string embed_model;
    std::string api_key;
    std::size_t dimension = 0;
    int timeout_seconds = 120;

    /// Reads MOTIVREC_API_BASE, MOTIVREC_API_KEY, MOTIVREC_CHAT_MODEL,
    /// MOTIVREC_EMBED_MODEL, MOTIVREC_EMBED_DIM, MOTIVREC_CHAT_PATH and MOTIVREC_EMBED_PATH.
    static HttpBackendOptions from_env();
};

class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendOptions options);

    std::string complete(const GenerationRequest& request, TokenUsage& usage) override;
    std::vector<Vector> embed(const std::vector<std::string>& texts) override;
    std::size_t dimension() const override { return options_.dimension; }
    std::string name() const override { return "http"; }

private:
    std::string post(const std::string& path, const std::string& body) const;

    HttpBackendOptions options_;
};

struct RetryPolicy {
    int attempts = 3;
    double initial_backoff_seconds = 0.5;
    std::uint64_t jitter_seed = 0;
    /// Replaced in tests to avoid real waits.
    std::function<void(double)> sleep;
};

struct GatewayStats {
    std::int64_t generations = 0;
    std::int64_t retries = 0;
    std::int64_t parse_failures = 0;
    std::int64_t transport_failures = 0;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

/// Template rendering, response parsing, retries and the in-flight bound in
/// front of a backend.
class Gateway {
public:
    Gateway(std::shared_ptr<Backend> backend, std::map<TemplateName, PromptTemplate> templates,
            RetryPolicy retry = {}, int max_in_flight = 4, int max_queries = 4, int max_tokens = 512);

    /// Parse failures are retried and, when they persist, returned with an
    /// empty payload. Transport failures that outlast the retries are rethrown.
    GenerationResponse generate(TemplateName name, const Bindings& bindings);

    /// Unit vectors, one per text. Throws InputError on empty input or text.
    std::vector<Vector> embed(const std::vector<std::string>& texts);
    Vector embed_one(const std::string& text);

    Backend& backend() { return *backend_; }
    const PromptTemplate& prompt(TemplateName name) const { return templates_.at(name); }
    int max_queries() const { return max_queries_; }
    GatewayStats stats() const;

private:
    template <typename Fn>
    auto with_retries(Fn&& fn) -> decltype(fn());
    void backoff(int attempt);

    std::shared_ptr<Backend> backend_;
    std::map<TemplateName, PromptTemplate> templates_;
    RetryPolicy retry_;
    std::unique_ptr<std::counting_semaphore<>> in_flight_;
    int max_queries_;
    int max_tokens_;

    mutable std::mutex mutex_;
    std::mt19937_64 jitter_;
    GatewayStats stats_;
};

}  // namespace motivrec
