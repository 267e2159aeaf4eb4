#include <httplib.h>

#include <cstdlib>

#include "motivrec/error.hpp"
#include "motivrec/gateway.hpp"
#include "motivrec/serialize.hpp"

namespace motivrec {
namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

}  // namespace

HttpBackendOptions HttpBackendOptions::from_env() {
    HttpBackendOptions o;
    o.base_url = env_or("MOTIVREC_API_BASE", "");
    o.api_key = env_or("MOTIVREC_API_KEY", "");
    o.chat_model = env_or("MOTIVREC_CHAT_MODEL", "");
    o.embed_model = env_or("MOTIVREC_EMBED_MODEL", "");
    o.chat_path = env_or("MOTIVREC_CHAT_PATH", o.chat_path);
    o.embed_path = env_or("MOTIVREC_EMBED_PATH", o.embed_path);
    const std::string dim = env_or("MOTIVREC_EMBED_DIM", "0");
    try {
        o.dimension = static_cast<std::size_t>(std::stoul(dim));
    } catch (const std::exception&) {
        throw ConfigError("MOTIVREC_EMBED_DIM must be a positive integer");
    }
    return o;
}

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
    if (options_.base_url.empty()) throw ConfigError("http backend: MOTIVREC_API_BASE is not set");
    if (options_.chat_model.empty()) throw ConfigError("http backend: MOTIVREC_CHAT_MODEL is not set");
    if (options_.embed_model.empty()) throw ConfigError("http backend: MOTIVREC_EMBED_MODEL is not set");
    if (options_.dimension == 0) throw ConfigError("http backend: MOTIVREC_EMBED_DIM is not set");
}

std::string HttpBackend::post(const std::string& path, const std::string& body) const {
    httplib::Client client(options_.base_url);
    client.set_connection_timeout(options_.timeout_seconds, 0);
    client.set_read_timeout(options_.timeout_seconds, 0);
    client.set_write_timeout(options_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    auto res = client.Post(path, headers, body, "application/json");
    if (!res) throw TransportError("http: " + httplib::to_string(res.error()));
    if (res->status == 429) throw TransportError("http: rate limited", true);
    if (res->status >= 500) throw TransportError("http: server error " + std::to_string(res->status));
    if (res->status < 200 || res->status >= 300) {
        throw Error("http: request rejected with status " + std::to_string(res->status) + ": " + res->body);
    }
    return res->body;
}

std::string HttpBackend::complete(const GenerationRequest& request, TokenUsage& usage) {
    json body{{"model", options_.chat_model},
              {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
              {"max_tokens", request.max_tokens}};
    const std::string raw = post(options_.chat_path, body.dump());
    try {
        auto reply = json::parse(raw);
        if (reply.contains("usage") && reply["usage"].is_object()) {
            usage.prompt_tokens = reply["usage"].value("prompt_tokens", std::int64_t{0});
            usage.completion_tokens = reply["usage"].value("completion_tokens", std::int64_t{0});
        }
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        return content.is_string() ? content.get<std::string>() : std::string();
    } catch (const json::exception& e) {
        throw TransportError(std::string("http: malformed chat response: ") + e.what());
    }
}

std::vector<Vector> HttpBackend::embed(const std::vector<std::string>& texts) {
    json body{{"model", options_.embed_model}, {"input", texts}};
    const std::string raw = post(options_.embed_path, body.dump());
    std::vector<Vector> out(texts.size());
    try {
        auto reply = json::parse(raw);
        const auto& data = reply.at("data");
        if (data.size() != texts.size()) throw TransportError("http: embedding count mismatch");
        for (std::size_t i = 0; i < data.size(); ++i) {
            const std::size_t slot = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
            if (slot >= out.size()) throw TransportError("http: embedding index out of range");
            out[slot] = data[i].at("embedding").get<Vector>();
        }
    } catch (const json::exception& e) {
        throw TransportError(std::string("http: malformed embedding response: ") + e.what());
    }
    for (auto& v : out) {
        if (v.size() != options_.dimension) {
            throw DimensionError("http: embedding dimension " + std::to_string(v.size()) + ", expected " +
                                 std::to_string(options_.dimension));
        }
    }
    return out;
}

}  // namespace motivrec
