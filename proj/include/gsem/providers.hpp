#pragma once
// Model access: chat-completion and embedding interfaces, an
// OpenAI-compatible HTTP client, and deterministic mocks that keep the
// whole pipeline testable offline.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gsem {

struct ChatRequest {
    std::string system;
    std::string user;
    double temperature = 0.0;
    std::optional<std::uint64_t> sample_seed;
    std::optional<int> max_reply_tokens;
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    std::optional<TokenUsage> usage;
};

struct EmbeddingVector {
    std::vector<double> values;

    double norm() const;
    void normalize();  // no-op direction for the zero vector
    double cosine(const EmbeddingVector& other) const;

    bool operator==(const EmbeddingVector&) const = default;
};

struct ProviderConfig {
    std::string endpoint_url;  // e.g. http://127.0.0.1:8000/v1
    std::string model_name;
    std::string api_key_env_var = "GSEM_API_KEY";
    std::chrono::milliseconds timeout{30000};
    int retry_count = 2;
    double requests_per_second = 0.0;  // 0 = unlimited
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResponse chat(const ChatRequest& request) = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // One unit-normalized vector per input text, order preserved.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

// Non-owning bundle handed through the pipeline. Null members are legal;
// operations that need a missing provider either degrade (where the
// contract says so) or fail loudly.
struct ProviderSet {
    ChatProvider* generation = nullptr;
    ChatProvider* policy = nullptr;
    EmbeddingProvider* embedding = nullptr;
};

// Simple requests-per-second limiter shared by the HTTP providers.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second) : rps_(requests_per_second) {}
    void acquire();

private:
    double rps_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point last_{};
};

class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(ProviderConfig config);
    ChatResponse chat(const ChatRequest& request) override;

private:
    ProviderConfig config_;
    RateLimiter limiter_;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(ProviderConfig config);
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    ProviderConfig config_;
    RateLimiter limiter_;
};

// One scripted reply per matcher hit. `uses` caps how often an entry may
// fire (0 = unlimited), so one matcher can yield a reply sequence.
struct ScriptEntry {
    std::string match;  // substring of the user text
    std::string reply;
    int uses = 0;
};

class ScriptedChatProvider : public ChatProvider {
public:
    explicit ScriptedChatProvider(std::vector<ScriptEntry> script);
    static ScriptedChatProvider from_file(const std::filesystem::path& path);

    ChatResponse chat(const ChatRequest& request) override;
    int calls() const { return calls_; }

private:
    struct Slot {
        ScriptEntry entry;
        int used = 0;
    };
    std::vector<Slot> slots_;
    int calls_ = 0;
};

// Deterministic 64-dimension character-trigram embedding. Uses FNV-1a so
// the mapping is identical across processes and platforms.
EmbeddingVector mock_embed_hash(std::string_view text);

class TrigramHashEmbedder : public EmbeddingProvider {
public:
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
};

}  // namespace gsem
