#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prct/analysis.hpp"
#include "prct/corpus.hpp"
#include "prct/harness/backend.hpp"
#include "prct/similarity.hpp"

namespace prct {

struct CorpusFileEntry {
    std::string path;
    Source source = Source::primary;
};

struct RandomizationConfig {
    std::uint64_t seed0 = 0;
    int max_attempts = 1000;
    double alpha = 0.05;
    double smd_cap = 0.1;
};

struct SimilarityConfig {
    double threshold = 0.85;
    std::string provider = "none"; // none (jaccard tier) | http
    std::string cache_dir;
    HttpEmbeddingConfig http;
};

struct RunConfig {
    std::vector<CorpusFileEntry> corpus_files;
    InclusionCriteria inclusion;
    RandomizationConfig randomization;
    InferenceConfig inference;
    std::string backend = "simulated"; // simulated | http
    SimulatedModelSpec simulated;
    HttpBackendConfig http;
    SimilarityConfig similarity;
    AnalysisConfig analysis;
    std::string output_dir = "out";
};

// Parses and validates a config file. Unknown keys anywhere are rejected
// with the offending field path (ConfigError).
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text, const std::string& origin);

} // namespace prct
