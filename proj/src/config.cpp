#include "gsem/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "gsem/error.hpp"
#include "gsem/json_writer.hpp"

namespace gsem {

std::vector<std::string> validate(const EngineConfig& cfg) {
    std::vector<std::string> violations;
    for (auto& v : validate(cfg.construction)) violations.push_back(v);
    for (auto& v : validate(cfg.retrieval)) violations.push_back(v);
    for (auto& v : validate(cfg.evolution)) violations.push_back(v);
    for (auto& v : validate(cfg.similarity_weights)) violations.push_back(v);
    auto check_spec = [&](const ProviderSpec& spec, const std::string& name) {
        static const std::set<std::string> kinds{"none", "http", "scripted", "trigram_hash"};
        if (!kinds.count(spec.kind))
            violations.push_back("providers." + name + ".kind unknown: " + spec.kind);
        if (spec.kind == "http" && spec.http.endpoint_url.empty())
            violations.push_back("providers." + name + ".endpoint_url required for kind http");
        if (spec.kind == "scripted" && spec.script_path.empty())
            violations.push_back("providers." + name + ".script_path required for kind scripted");
        if (spec.kind == "http" && spec.http.retry_count < 0)
            violations.push_back("providers." + name + ".retry_count must be >= 0");
    };
    check_spec(cfg.generation_provider, "generation");
    check_spec(cfg.policy_provider, "policy");
    check_spec(cfg.embedding_provider, "embedding");
    if (cfg.embedding_provider.kind == "scripted")
        violations.push_back("providers.embedding.kind scripted is not an embedding provider");
    return violations;
}

namespace {

void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ValidationError("config: unknown key " + where + "." + it.key());
}

ProviderSpec parse_provider(const nlohmann::json& j, const std::string& name,
                            const std::filesystem::path& base_dir) {
    reject_unknown_keys(j,
                        {"kind", "endpoint_url", "model_name", "api_key_env_var", "timeout_ms",
                         "retry_count", "requests_per_second", "script_path"},
                        "providers." + name);
    ProviderSpec spec;
    spec.kind = j.value("kind", std::string("none"));
    spec.http.endpoint_url = j.value("endpoint_url", std::string());
    spec.http.model_name = j.value("model_name", std::string());
    spec.http.api_key_env_var = j.value("api_key_env_var", std::string("GSEM_API_KEY"));
    spec.http.timeout = std::chrono::milliseconds(j.value("timeout_ms", std::int64_t{30000}));
    spec.http.retry_count = j.value("retry_count", 2);
    spec.http.requests_per_second = j.value("requests_per_second", 0.0);
    if (j.contains("script_path")) {
        std::filesystem::path p = j.at("script_path").get<std::string>();
        spec.script_path = p.is_absolute() ? p : base_dir / p;
    }
    return spec;
}

}  // namespace

EngineConfig load_engine_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GsemError("cannot read config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json root = parse_json(text, "config " + path.string());
    const std::filesystem::path base_dir = path.parent_path();

    EngineConfig cfg;
    try {
        reject_unknown_keys(root,
                            {"construction", "retrieval", "evolution", "similarity_weights",
                             "providers", "master_seed"},
                            "config");
        if (root.contains("construction")) {
            const auto& c = root["construction"];
            reject_unknown_keys(c, {"n_traj", "n_erv", "dedup_threshold", "theta_edge"},
                                "construction");
            cfg.construction.n_traj = c.value("n_traj", cfg.construction.n_traj);
            cfg.construction.n_erv = c.value("n_erv", cfg.construction.n_erv);
            cfg.construction.dedup_threshold =
                c.value("dedup_threshold", cfg.construction.dedup_threshold);
            cfg.construction.theta_edge = c.value("theta_edge", cfg.construction.theta_edge);
        }
        if (root.contains("retrieval")) {
            const auto& r = root["retrieval"];
            reject_unknown_keys(r,
                                {"k_seed", "k_neighbors", "t_max", "rerank_lambda", "bm25_k1",
                                 "bm25_b", "collect_threshold"},
                                "retrieval");
            cfg.retrieval.k_seed = r.value("k_seed", cfg.retrieval.k_seed);
            cfg.retrieval.k_neighbors = r.value("k_neighbors", cfg.retrieval.k_neighbors);
            cfg.retrieval.t_max = r.value("t_max", cfg.retrieval.t_max);
            cfg.retrieval.rerank_lambda = r.value("rerank_lambda", cfg.retrieval.rerank_lambda);
            cfg.retrieval.bm25_k1 = r.value("bm25_k1", cfg.retrieval.bm25_k1);
            cfg.retrieval.bm25_b = r.value("bm25_b", cfg.retrieval.bm25_b);
            cfg.retrieval.collect_threshold =
                r.value("collect_threshold", cfg.retrieval.collect_threshold);
        }
        if (root.contains("evolution")) {
            const auto& e = root["evolution"];
            reject_unknown_keys(e, {"eta_q", "eta_w", "rho", "literal_w_recurrence"}, "evolution");
            cfg.evolution.eta_q = e.value("eta_q", cfg.evolution.eta_q);
            cfg.evolution.eta_w = e.value("eta_w", cfg.evolution.eta_w);
            cfg.evolution.rho = e.value("rho", cfg.evolution.rho);
            cfg.evolution.literal_w_recurrence =
                e.value("literal_w_recurrence", cfg.evolution.literal_w_recurrence);
        }
        if (root.contains("similarity_weights")) {
            const auto& w = root["similarity_weights"];
            reject_unknown_keys(w, {"alpha", "beta", "gamma", "delta"}, "similarity_weights");
            cfg.similarity_weights.alpha = w.value("alpha", cfg.similarity_weights.alpha);
            cfg.similarity_weights.beta = w.value("beta", cfg.similarity_weights.beta);
            cfg.similarity_weights.gamma = w.value("gamma", cfg.similarity_weights.gamma);
            cfg.similarity_weights.delta = w.value("delta", cfg.similarity_weights.delta);
        }
        if (root.contains("providers")) {
            const auto& p = root["providers"];
            reject_unknown_keys(p, {"generation", "policy", "embedding"}, "providers");
            if (p.contains("generation"))
                cfg.generation_provider = parse_provider(p["generation"], "generation", base_dir);
            if (p.contains("policy"))
                cfg.policy_provider = parse_provider(p["policy"], "policy", base_dir);
            if (p.contains("embedding"))
                cfg.embedding_provider = parse_provider(p["embedding"], "embedding", base_dir);
        }
        cfg.master_seed = root.value("master_seed", cfg.master_seed);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config " + path.string() + ": " + e.what());
    }
    cfg.construction.similarity_weights = cfg.similarity_weights;

    if (auto bad = validate(cfg); !bad.empty()) {
        std::string msg = "config " + path.string() + " invalid:";
        for (const auto& v : bad) msg += " " + v + ";";
        throw ValidationError(msg);
    }
    return cfg;
}

OwnedProviders make_providers(const EngineConfig& cfg) {
    OwnedProviders out;
    auto make_chat = [](const ProviderSpec& spec) -> std::unique_ptr<ChatProvider> {
        if (spec.kind == "http") return std::make_unique<HttpChatProvider>(spec.http);
        if (spec.kind == "scripted")
            return std::make_unique<ScriptedChatProvider>(
                ScriptedChatProvider::from_file(spec.script_path));
        if (spec.kind == "none") return nullptr;
        throw ValidationError("provider kind " + spec.kind + " is not a chat provider");
    };
    out.generation = make_chat(cfg.generation_provider);
    out.policy = make_chat(cfg.policy_provider);
    const ProviderSpec& e = cfg.embedding_provider;
    if (e.kind == "http") {
        out.embedding = std::make_unique<HttpEmbeddingProvider>(e.http);
    } else if (e.kind == "trigram_hash") {
        out.embedding = std::make_unique<TrigramHashEmbedder>();
    } else if (e.kind != "none") {
        throw ValidationError("provider kind " + e.kind + " is not an embedding provider");
    }
    return out;
}

}  // namespace gsem
