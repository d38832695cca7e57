#include "prct/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "prct/errors.hpp"

namespace prct {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& path) {
    if (!obj.is_object()) throw ConfigError("expected an object at " + path, path);
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ConfigError("unknown config key: " + path + "." + key,
                                                   path + "." + key);
}

template <typename T>
void get_to(const json& obj, const char* key, T& out, const std::string& path) {
    if (!obj.contains(key)) return;
    try {
        obj[key].get_to(out);
    } catch (const json::exception& e) {
        throw ConfigError("bad value for " + path + "." + key + ": " + e.what(),
                          path + "." + key);
    }
}

} // namespace

RunConfig parse_config(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError("config " + origin + " is not valid JSON: " + e.what(), origin);
    }
    RunConfig cfg;
    check_keys(doc, {"corpus", "randomization", "inference", "similarity", "analysis",
                     "output_dir"},
               "config");
    get_to(doc, "output_dir", cfg.output_dir, "config");

    if (doc.contains("corpus")) {
        const json& corpus = doc["corpus"];
        check_keys(corpus, {"files", "inclusion"}, "corpus");
        if (corpus.contains("files")) {
            if (!corpus["files"].is_array())
                throw ConfigError("corpus.files must be an array", "corpus.files");
            for (std::size_t i = 0; i < corpus["files"].size(); ++i) {
                const json& f = corpus["files"][i];
                std::string fpath = "corpus.files[" + std::to_string(i) + "]";
                check_keys(f, {"path", "source"}, fpath);
                CorpusFileEntry entry;
                if (!f.contains("path"))
                    throw ConfigError("missing " + fpath + ".path", fpath + ".path");
                get_to(f, "path", entry.path, fpath);
                std::string source = "primary";
                get_to(f, "source", source, fpath);
                entry.source = source_from_name(source);
                cfg.corpus_files.push_back(std::move(entry));
            }
        }
        if (corpus.contains("inclusion")) {
            const json& inc = corpus["inclusion"];
            check_keys(inc, {"min_length", "allowed_statuses", "excluded_prefixes"},
                       "corpus.inclusion");
            get_to(inc, "min_length", cfg.inclusion.min_length, "corpus.inclusion");
            get_to(inc, "allowed_statuses", cfg.inclusion.allowed_statuses, "corpus.inclusion");
            get_to(inc, "excluded_prefixes", cfg.inclusion.excluded_prefixes, "corpus.inclusion");
        }
    }

    if (doc.contains("randomization")) {
        const json& r = doc["randomization"];
        check_keys(r, {"seed0", "max_attempts", "alpha", "smd_cap"}, "randomization");
        get_to(r, "seed0", cfg.randomization.seed0, "randomization");
        get_to(r, "max_attempts", cfg.randomization.max_attempts, "randomization");
        get_to(r, "alpha", cfg.randomization.alpha, "randomization");
        get_to(r, "smd_cap", cfg.randomization.smd_cap, "randomization");
    }

    if (doc.contains("inference")) {
        const json& inf = doc["inference"];
        check_keys(inf,
                   {"model_name", "temperature", "max_output_tokens", "system_prompt",
                    "rpm_limit", "retry_backoff_seconds", "pricing", "adaptive_chunk_chars",
                    "backend", "simulated", "http"},
                   "inference");
        get_to(inf, "model_name", cfg.inference.model_name, "inference");
        get_to(inf, "temperature", cfg.inference.temperature, "inference");
        get_to(inf, "max_output_tokens", cfg.inference.max_output_tokens, "inference");
        get_to(inf, "system_prompt", cfg.inference.system_prompt, "inference");
        get_to(inf, "rpm_limit", cfg.inference.rpm_limit, "inference");
        get_to(inf, "retry_backoff_seconds", cfg.inference.retry_backoff_seconds, "inference");
        get_to(inf, "adaptive_chunk_chars", cfg.inference.adaptive_chunk_chars, "inference");
        get_to(inf, "backend", cfg.backend, "inference");
        if (cfg.backend != "simulated" && cfg.backend != "http")
            throw ConfigError("inference.backend must be 'simulated' or 'http'",
                              "inference.backend");
        if (inf.contains("pricing")) {
            const json& p = inf["pricing"];
            check_keys(p, {"input_usd_per_mtok", "output_usd_per_mtok"}, "inference.pricing");
            get_to(p, "input_usd_per_mtok", cfg.inference.pricing.input_usd_per_mtok,
                   "inference.pricing");
            get_to(p, "output_usd_per_mtok", cfg.inference.pricing.output_usd_per_mtok,
                   "inference.pricing");
            if (cfg.inference.pricing.input_usd_per_mtok <= 0 ||
                cfg.inference.pricing.output_usd_per_mtok <= 0)
                throw ConfigError("prices must be positive", "inference.pricing");
        }
        if (inf.contains("simulated")) {
            const json& s = inf["simulated"];
            check_keys(s,
                       {"base_output_tokens", "expansion_curve", "noise_sigma", "noise_seed",
                        "latency_base_ms", "latency_per_output_token_ms"},
                       "inference.simulated");
            get_to(s, "base_output_tokens", cfg.simulated.base_output_tokens,
                   "inference.simulated");
            if (s.contains("expansion_curve")) {
                cfg.simulated.expansion_curve.clear();
                for (const auto& knot : s["expansion_curve"]) {
                    if (!knot.is_array() || knot.size() != 2)
                        throw ConfigError("expansion_curve knots must be [ratio, multiplier]",
                                          "inference.simulated.expansion_curve");
                    cfg.simulated.expansion_curve.emplace_back(knot[0].get<double>(),
                                                               knot[1].get<double>());
                }
                for (const auto& [ratio, mult] : cfg.simulated.expansion_curve)
                    if (mult <= 0.0)
                        throw ConfigError("expansion multipliers must be positive",
                                          "inference.simulated.expansion_curve");
            }
            get_to(s, "noise_sigma", cfg.simulated.noise_sigma, "inference.simulated");
            get_to(s, "noise_seed", cfg.simulated.noise_seed, "inference.simulated");
            get_to(s, "latency_base_ms", cfg.simulated.latency_base_ms, "inference.simulated");
            get_to(s, "latency_per_output_token_ms", cfg.simulated.latency_per_output_token_ms,
                   "inference.simulated");
        }
        if (inf.contains("http")) {
            const json& h = inf["http"];
            check_keys(h,
                       {"base_url", "path", "api_key_env", "headers", "response_text_pointer",
                        "input_tokens_pointer", "output_tokens_pointer", "timeout_seconds"},
                       "inference.http");
            get_to(h, "base_url", cfg.http.base_url, "inference.http");
            get_to(h, "path", cfg.http.path, "inference.http");
            get_to(h, "api_key_env", cfg.http.api_key_env, "inference.http");
            if (h.contains("headers")) {
                cfg.http.headers.clear();
                for (const auto& [name, value] : h["headers"].items())
                    cfg.http.headers.emplace_back(name, value.get<std::string>());
            }
            get_to(h, "response_text_pointer", cfg.http.response_text_pointer, "inference.http");
            get_to(h, "input_tokens_pointer", cfg.http.input_tokens_pointer, "inference.http");
            get_to(h, "output_tokens_pointer", cfg.http.output_tokens_pointer, "inference.http");
            get_to(h, "timeout_seconds", cfg.http.timeout_seconds, "inference.http");
        }
    }

    if (doc.contains("similarity")) {
        const json& s = doc["similarity"];
        check_keys(s, {"threshold", "provider", "cache_dir", "http"}, "similarity");
        get_to(s, "threshold", cfg.similarity.threshold, "similarity");
        get_to(s, "provider", cfg.similarity.provider, "similarity");
        if (cfg.similarity.provider != "none" && cfg.similarity.provider != "http")
            throw ConfigError("similarity.provider must be 'none' or 'http'",
                              "similarity.provider");
        get_to(s, "cache_dir", cfg.similarity.cache_dir, "similarity");
        if (s.contains("http")) {
            const json& h = s["http"];
            check_keys(h,
                       {"base_url", "path", "api_key_env", "model", "embedding_pointer",
                        "dimension", "timeout_seconds"},
                       "similarity.http");
            get_to(h, "base_url", cfg.similarity.http.base_url, "similarity.http");
            get_to(h, "path", cfg.similarity.http.path, "similarity.http");
            get_to(h, "api_key_env", cfg.similarity.http.api_key_env, "similarity.http");
            get_to(h, "model", cfg.similarity.http.model, "similarity.http");
            get_to(h, "embedding_pointer", cfg.similarity.http.embedding_pointer,
                   "similarity.http");
            get_to(h, "dimension", cfg.similarity.http.dimension, "similarity.http");
            get_to(h, "timeout_seconds", cfg.similarity.http.timeout_seconds, "similarity.http");
        }
    }

    if (doc.contains("analysis")) {
        const json& a = doc["analysis"];
        check_keys(a,
                   {"population", "bootstrap_B", "n_perm", "seed", "preserved_threshold",
                    "h4_savings_target", "h4_similarity_target"},
                   "analysis");
        get_to(a, "population", cfg.analysis.population, "analysis");
        if (cfg.analysis.population != "complete_case" &&
            cfg.analysis.population != "all_submitted")
            throw ConfigError("analysis.population must be 'complete_case' or 'all_submitted'",
                              "analysis.population");
        get_to(a, "bootstrap_B", cfg.analysis.bootstrap_B, "analysis");
        get_to(a, "n_perm", cfg.analysis.n_perm, "analysis");
        get_to(a, "seed", cfg.analysis.seed, "analysis");
        get_to(a, "preserved_threshold", cfg.analysis.preserved_threshold, "analysis");
        get_to(a, "h4_savings_target", cfg.analysis.h4_savings_target, "analysis");
        get_to(a, "h4_similarity_target", cfg.analysis.h4_similarity_target, "analysis");
    }

    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path, path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

} // namespace prct
