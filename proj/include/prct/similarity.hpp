#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prct/harness/harness.hpp"

namespace prct {

enum class SimMethod { embedding_cosine, jaccard };
std::string sim_method_name(SimMethod m);
SimMethod sim_method_from_name(std::string_view name);

struct SimilarityScore {
    double value = 0.0;
    SimMethod method = SimMethod::jaccard;
    bool preserved = false; // value >= threshold
};

struct ResponsePair {
    std::string stimulus_id;
    Arm arm = Arm::light; // never control
    std::string treatment_response;
    std::string control_response;
};

struct ScoreRecord {
    std::string stimulus_id;
    Arm arm = Arm::light;
    double value = 0.0;
    SimMethod method = SimMethod::jaccard;
    bool preserved = false;
};

// dot(u,v) / (|u||v|). Throws DegenerateInputError on dimension mismatch or
// a zero-norm vector.
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const float> u, std::span<const float> v);

// |A n B| / |A u B| over whitespace-token sets; two empty texts score 1.
double jaccard(std::string_view a, std::string_view b);

// Fetches text embeddings; throws on failure (score_pair absorbs the error
// into the fallback tier).
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<float> embed(const std::string& text) = 0;
    virtual std::size_t dimension() const = 0;
};

// Tiered scoring: embedding cosine when a provider is present and succeeds,
// otherwise token-set Jaccard. Never throws; the method tag is always
// honest, and `fallback_cause` (when given) records why a fallback fired.
SimilarityScore score_pair(const ResponsePair& pair, EmbeddingProvider* provider,
                           double threshold = 0.85, std::string* fallback_cause = nullptr);

// Inner join of successful records on stimulus_id (treatment arm records
// only); unmatched treatment ids reported. Duplicate successes for one id
// raise CorruptLogError.
std::vector<ResponsePair> build_pairs(const std::vector<TrialRecord>& treatment_log,
                                      const std::vector<TrialRecord>& control_baseline_log,
                                      std::vector<std::string>* unmatched = nullptr);

// Content-addressed embedding cache: <dir>/<sha256(text)>.vec holding a
// little-endian uint32 dimension followed by dimension float32 values.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::string dir);
    std::optional<std::vector<float>> lookup(const std::string& text) const;
    void store(const std::string& text, const std::vector<float>& embedding) const;

private:
    std::string dir_;
};

class CachingProvider final : public EmbeddingProvider {
public:
    CachingProvider(EmbeddingProvider& inner, std::string cache_dir)
        : inner_(inner), cache_(std::move(cache_dir)) {}
    std::vector<float> embed(const std::string& text) override;
    std::size_t dimension() const override { return inner_.dimension(); }

private:
    EmbeddingProvider& inner_;
    EmbeddingCache cache_;
};

// Generic embeddings-endpoint adapter (OpenAI-style request shape by
// default); the API key comes from the named environment variable.
struct HttpEmbeddingConfig {
    std::string base_url;
    std::string path = "/v1/embeddings";
    std::string api_key_env = "PRCT_EMBED_API_KEY";
    std::string model = "text-embedding-3-small";
    std::string embedding_pointer = "/data/0/embedding";
    std::size_t dimension = 1536;
    double timeout_seconds = 60.0;
};

class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpEmbeddingConfig cfg);
    std::vector<float> embed(const std::string& text) override;
    std::size_t dimension() const override { return cfg_.dimension; }

private:
    HttpEmbeddingConfig cfg_;
    std::string api_key_;
};

std::string score_record_to_json_line(const ScoreRecord& r);
ScoreRecord score_record_from_json_line(const std::string& line);
void write_score_jsonl(const std::vector<ScoreRecord>& scores, const std::string& path);
std::vector<ScoreRecord> read_score_jsonl(const std::string& path);

} // namespace prct
