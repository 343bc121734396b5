#include "gsem/providers.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "gsem/error.hpp"
#include "gsem/json_writer.hpp"

namespace gsem {

double EmbeddingVector::norm() const {
    double sq = 0.0;
    for (double x : values) sq += x * x;
    return std::sqrt(sq);
}

void EmbeddingVector::normalize() {
    double n = norm();
    if (n > 0.0)
        for (double& x : values) x /= n;
}

double EmbeddingVector::cosine(const EmbeddingVector& other) const {
    if (values.size() != other.values.size())
        throw ValidationError("cosine of vectors with different dimensions");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        dot += values[i] * other.values[i];
        na += values[i] * values[i];
        nb += other.values[i] * other.values[i];
    }
    double denom = std::sqrt(na) * std::sqrt(nb);
    return denom > 0.0 ? dot / denom : 0.0;
}

void RateLimiter::acquire() {
    if (rps_ <= 0.0) return;
    std::lock_guard<std::mutex> lock(mu_);
    auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / rps_));
    auto now = std::chrono::steady_clock::now();
    auto ready = last_ + interval;
    if (now < ready) {
        std::this_thread::sleep_for(ready - now);
        now = std::chrono::steady_clock::now();
    }
    last_ = now;
}

namespace {

struct SplitUrl {
    std::string base;         // scheme://host[:port]
    std::string path_prefix;  // no trailing slash
};

SplitUrl split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ValidationError("endpoint_url must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

std::string bearer_token(const ProviderConfig& config) {
    if (config.api_key_env_var.empty()) return "";
    const char* key = std::getenv(config.api_key_env_var.c_str());
    return key ? key : "";
}

// POSTs with retries on transport errors and 5xx; other statuses are
// surfaced immediately with body. The API key never enters any message.
nlohmann::json post_with_retries(const ProviderConfig& config, RateLimiter& limiter,
                                 const std::string& path, const nlohmann::json& body) {
    SplitUrl url = split_endpoint(config.endpoint_url);
    std::string payload = body.dump();
    std::string token = bearer_token(config);

    std::string last_error;
    for (int attempt = 0; attempt <= config.retry_count; ++attempt) {
        if (attempt > 0) {
            auto backoff = std::chrono::milliseconds(100) * (1 << (attempt - 1));
            std::this_thread::sleep_for(std::min(backoff, std::chrono::milliseconds(2000)));
        }
        limiter.acquire();

        httplib::Client client(url.base);
        client.set_connection_timeout(config.timeout);
        client.set_read_timeout(config.timeout);
        client.set_write_timeout(config.timeout);
        httplib::Headers headers;
        if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

        auto res = client.Post(url.path_prefix + path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error " + std::to_string(res->status) + ": " + res->body;
            continue;
        }
        if (res->status < 200 || res->status >= 300)
            throw ProviderError("http " + std::to_string(res->status) + " from " + path + ": " +
                                res->body);
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ProviderError(std::string("malformed provider response: ") + e.what());
        }
    }
    throw ProviderError("request to " + path + " failed after " +
                        std::to_string(config.retry_count + 1) + " attempts; last: " + last_error);
}

}  // namespace

HttpChatProvider::HttpChatProvider(ProviderConfig config)
    : config_(std::move(config)), limiter_(config_.requests_per_second) {}

ChatResponse HttpChatProvider::chat(const ChatRequest& request) {
    if (request.user.empty()) throw ValidationError("chat request has empty user text");

    nlohmann::json body;
    body["model"] = config_.model_name;
    auto& messages = body["messages"] = nlohmann::json::array();
    if (!request.system.empty())
        messages.push_back({{"role", "system"}, {"content", request.system}});
    messages.push_back({{"role", "user"}, {"content", request.user}});
    body["temperature"] = request.temperature;
    if (request.sample_seed) body["seed"] = *request.sample_seed;
    if (request.max_reply_tokens) body["max_tokens"] = *request.max_reply_tokens;

    nlohmann::json reply = post_with_retries(config_, limiter_, "/chat/completions", body);
    ChatResponse out;
    try {
        out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        if (reply.contains("usage")) {
            TokenUsage usage;
            usage.prompt_tokens = reply["usage"].value("prompt_tokens", std::int64_t{0});
            usage.completion_tokens = reply["usage"].value("completion_tokens", std::int64_t{0});
            out.usage = usage;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("unexpected chat response shape: ") + e.what());
    }
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(ProviderConfig config)
    : config_(std::move(config)), limiter_(config_.requests_per_second) {}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ValidationError("embed called with empty text list");

    nlohmann::json body;
    body["model"] = config_.model_name;
    body["input"] = texts;

    nlohmann::json reply = post_with_retries(config_, limiter_, "/embeddings", body);
    std::vector<EmbeddingVector> out(texts.size());
    try {
        for (const auto& item : reply.at("data")) {
            std::size_t index = item.at("index").get<std::size_t>();
            if (index >= out.size()) throw ProviderError("embedding index out of range");
            out[index].values = item.at("embedding").get<std::vector<double>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("unexpected embeddings response shape: ") + e.what());
    }
    for (auto& v : out) {
        if (v.values.empty()) throw ProviderError("embeddings response is missing an input");
        v.normalize();
    }
    return out;
}

ScriptedChatProvider::ScriptedChatProvider(std::vector<ScriptEntry> script) {
    slots_.reserve(script.size());
    for (auto& entry : script) slots_.push_back(Slot{std::move(entry), 0});
}

ScriptedChatProvider ScriptedChatProvider::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GsemError("cannot read script file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json root = parse_json(text, "script " + path.string());
    std::vector<ScriptEntry> script;
    for (const auto& item : root) {
        ScriptEntry entry;
        entry.match = item.at("match").get<std::string>();
        entry.reply = item.at("reply").get<std::string>();
        entry.uses = item.value("uses", 0);
        script.push_back(std::move(entry));
    }
    return ScriptedChatProvider(std::move(script));
}

ChatResponse ScriptedChatProvider::chat(const ChatRequest& request) {
    if (request.user.empty()) throw ValidationError("chat request has empty user text");
    ++calls_;
    for (auto& slot : slots_) {
        if (slot.entry.uses > 0 && slot.used >= slot.entry.uses) continue;
        if (request.user.find(slot.entry.match) == std::string::npos) continue;
        ++slot.used;
        return ChatResponse{slot.entry.reply, std::nullopt};
    }
    throw ProviderError("scripted provider: no matcher for request (call " +
                        std::to_string(calls_) + "): " + request.user);
}

namespace {

constexpr std::size_t kMockDim = 64;

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

EmbeddingVector mock_embed_hash(std::string_view text) {
    EmbeddingVector v;
    v.values.assign(kMockDim, 0.0);
    if (text.size() >= 3) {
        for (std::size_t i = 0; i + 3 <= text.size(); ++i)
            v.values[fnv1a64(text.substr(i, 3)) % kMockDim] += 1.0;
    }
    if (v.norm() == 0.0) {
        v.values[0] = 1.0;  // degenerate text maps to the first basis vector
        return v;
    }
    v.normalize();
    return v;
}

std::vector<EmbeddingVector> TrigramHashEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ValidationError("embed called with empty text list");
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(mock_embed_hash(t));
    return out;
}

}  // namespace gsem
