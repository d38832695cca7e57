#include "prct/similarity.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "prct/errors.hpp"
#include "prct/sha256.hpp"
#include "prct/text.hpp"

namespace prct {

std::string sim_method_name(SimMethod m) {
    return m == SimMethod::embedding_cosine ? "embedding_cosine" : "jaccard";
}

SimMethod sim_method_from_name(std::string_view name) {
    if (name == "embedding_cosine") return SimMethod::embedding_cosine;
    if (name == "jaccard") return SimMethod::jaccard;
    throw IngestError("unknown similarity method: " + std::string(name));
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
    if (u.size() != v.size())
        throw DegenerateInputError("cosine: dimension mismatch (" + std::to_string(u.size()) +
                                   " vs " + std::to_string(v.size()) + ")");
    if (u.empty()) throw DegenerateInputError("cosine: empty vectors");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += double(u[i]) * double(v[i]);
        nu += double(u[i]) * double(u[i]);
        nv += double(v[i]) * double(v[i]);
    }
    if (nu == 0.0 || nv == 0.0) throw DegenerateInputError("cosine: zero-norm vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

} // namespace

double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }
double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }

double jaccard(std::string_view a, std::string_view b) {
    std::unordered_set<std::string> sa, sb;
    for (std::string& t : word_tokens(a)) sa.insert(std::move(t));
    for (std::string& t : word_tokens(b)) sb.insert(std::move(t));
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t inter = 0;
    for (const std::string& t : sa)
        if (sb.count(t)) ++inter;
    std::size_t uni = sa.size() + sb.size() - inter;
    return double(inter) / double(uni);
}

SimilarityScore score_pair(const ResponsePair& pair, EmbeddingProvider* provider,
                           double threshold, std::string* fallback_cause) {
    SimilarityScore score;
    if (provider) {
        try {
            std::vector<float> u = provider->embed(pair.treatment_response);
            std::vector<float> v = provider->embed(pair.control_response);
            score.value = cosine(std::span<const float>(u), std::span<const float>(v));
            score.method = SimMethod::embedding_cosine;
            score.preserved = score.value >= threshold;
            return score;
        } catch (const std::exception& e) {
            if (fallback_cause) *fallback_cause = e.what();
        }
    } else if (fallback_cause) {
        *fallback_cause = "no embedding provider configured";
    }
    score.value = jaccard(pair.treatment_response, pair.control_response);
    score.method = SimMethod::jaccard;
    score.preserved = score.value >= threshold;
    return score;
}

std::vector<ResponsePair> build_pairs(const std::vector<TrialRecord>& treatment_log,
                                      const std::vector<TrialRecord>& control_baseline_log,
                                      std::vector<std::string>* unmatched) {
    std::unordered_map<std::string, const TrialRecord*> control_by_id;
    for (const TrialRecord& r : control_baseline_log) {
        if (r.outcome != TrialOutcome::success) continue;
        if (!control_by_id.emplace(r.stimulus_id, &r).second)
            throw CorruptLogError(
                "duplicate successful record in control baseline log: " + r.stimulus_id, 0);
    }
    std::unordered_set<std::string> seen_treatment;
    std::vector<ResponsePair> pairs;
    for (const TrialRecord& r : treatment_log) {
        if (r.outcome != TrialOutcome::success) continue;
        if (r.arm == Arm::control) continue; // control compares to itself by definition
        if (!seen_treatment.insert(r.stimulus_id).second)
            throw CorruptLogError("duplicate successful record in treatment log: " + r.stimulus_id,
                                  0);
        auto it = control_by_id.find(r.stimulus_id);
        if (it == control_by_id.end()) {
            if (unmatched) unmatched->push_back(r.stimulus_id);
            continue;
        }
        ResponsePair p;
        p.stimulus_id = r.stimulus_id;
        p.arm = r.arm;
        p.treatment_response = r.response_text.value_or("");
        p.control_response = it->second->response_text.value_or("");
        pairs.push_back(std::move(p));
    }
    return pairs;
}

EmbeddingCache::EmbeddingCache(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::optional<std::vector<float>> EmbeddingCache::lookup(const std::string& text) const {
    std::string path = dir_ + "/" + sha256_hex(text) + ".vec";
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::uint8_t hdr[4];
    if (!in.read(reinterpret_cast<char*>(hdr), 4)) return std::nullopt;
    std::uint32_t dim = std::uint32_t(hdr[0]) | (std::uint32_t(hdr[1]) << 8) |
                        (std::uint32_t(hdr[2]) << 16) | (std::uint32_t(hdr[3]) << 24);
    std::vector<float> v(dim);
    if (!in.read(reinterpret_cast<char*>(v.data()), std::streamsize(dim * sizeof(float))))
        return std::nullopt;
    return v;
}

void EmbeddingCache::store(const std::string& text, const std::vector<float>& embedding) const {
    std::string path = dir_ + "/" + sha256_hex(text) + ".vec";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write embedding cache entry: " + path);
    auto dim = std::uint32_t(embedding.size());
    std::uint8_t hdr[4] = {std::uint8_t(dim), std::uint8_t(dim >> 8), std::uint8_t(dim >> 16),
                           std::uint8_t(dim >> 24)};
    out.write(reinterpret_cast<const char*>(hdr), 4);
    out.write(reinterpret_cast<const char*>(embedding.data()),
              std::streamsize(embedding.size() * sizeof(float)));
}

std::vector<float> CachingProvider::embed(const std::string& text) {
    if (auto hit = cache_.lookup(text)) return *hit;
    std::vector<float> v = inner_.embed(text);
    cache_.store(text, v);
    return v;
}

std::string score_record_to_json_line(const ScoreRecord& r) {
    nlohmann::ordered_json j;
    j["stimulus_id"] = r.stimulus_id;
    j["arm"] = arm_name(r.arm);
    j["value"] = r.value;
    j["method"] = sim_method_name(r.method);
    j["preserved"] = r.preserved;
    return j.dump();
}

ScoreRecord score_record_from_json_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    ScoreRecord r;
    r.stimulus_id = j.at("stimulus_id").get<std::string>();
    r.arm = arm_from_name(j.at("arm").get<std::string>());
    r.value = j.at("value").get<double>();
    r.method = sim_method_from_name(j.at("method").get<std::string>());
    r.preserved = j.at("preserved").get<bool>();
    return r;
}

void write_score_jsonl(const std::vector<ScoreRecord>& scores, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write score file: " + path);
    for (const ScoreRecord& r : scores) out << score_record_to_json_line(r) << '\n';
}

std::vector<ScoreRecord> read_score_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read score file: " + path);
    std::vector<ScoreRecord> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(score_record_from_json_line(line));
    return out;
}

} // namespace prct
