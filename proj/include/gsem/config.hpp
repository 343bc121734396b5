#pragma once
// Engine configuration: one structured file carrying every tunable, plus
// provider wiring (http endpoints, scripted mocks, hash embeddings).

#include <filesystem>
#include <memory>
#include <string>

#include "gsem/construction.hpp"
#include "gsem/evolution.hpp"
#include "gsem/providers.hpp"
#include "gsem/retrieval.hpp"

namespace gsem {

struct ProviderSpec {
    std::string kind = "none";  // none | http | scripted | trigram_hash
    ProviderConfig http;
    std::filesystem::path script_path;
};

struct EngineConfig {
    ConstructionConfig construction;
    RetrievalConfig retrieval;
    EvolutionConfig evolution;
    SimilarityWeights similarity_weights;
    ProviderSpec generation_provider;
    ProviderSpec policy_provider;
    ProviderSpec embedding_provider;
    std::uint64_t master_seed = 0;
};

std::vector<std::string> validate(const EngineConfig& cfg);

// Missing keys keep their defaults; unknown keys are rejected so typos
// fail loudly. Relative script paths resolve against the config file.
EngineConfig load_engine_config(const std::filesystem::path& path);

struct OwnedProviders {
    std::unique_ptr<ChatProvider> generation;
    std::unique_ptr<ChatProvider> policy;
    std::unique_ptr<EmbeddingProvider> embedding;

    ProviderSet set() const {
        return ProviderSet{generation.get(), policy.get(), embedding.get()};
    }
};

OwnedProviders make_providers(const EngineConfig& cfg);

}  // namespace gsem
