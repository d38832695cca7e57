#include "prct/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "prct/errors.hpp"
#include "prct/sha256.hpp"
#include "prct/text.hpp"

namespace prct {

std::string source_name(Source s) { return s == Source::primary ? "primary" : "azure"; }

Source source_from_name(std::string_view name) {
    if (name == "primary") return Source::primary;
    if (name == "azure") return Source::azure;
    throw IngestError("unknown source environment: " + std::string(name));
}

std::string tercile_name(Tercile t) {
    switch (t) {
        case Tercile::short_bin: return "short";
        case Tercile::medium_bin: return "medium";
        case Tercile::long_bin: return "long";
    }
    return "short";
}

Tercile tercile_from_name(std::string_view name) {
    if (name == "short") return Tercile::short_bin;
    if (name == "medium") return Tercile::medium_bin;
    if (name == "long") return Tercile::long_bin;
    throw IngestError("unknown tercile: " + std::string(name));
}

LoadResult load_records(const std::vector<std::pair<std::string, Source>>& paths) {
    LoadResult result;
    for (const auto& [path, source] : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IngestError("cannot read raw record file: " + path);
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw IngestError("invalid JSON in " + path + ": " + e.what());
        }
        if (!doc.is_array())
            throw IngestError("raw record file must be a JSON array: " + path);
        for (std::size_t i = 0; i < doc.size(); ++i) {
            const nlohmann::json& rec = doc[i];
            auto skip = [&](const std::string& reason) {
                result.skips.push_back({path, i, reason});
            };
            if (!rec.is_object()) {
                skip("record is not an object");
                continue;
            }
            RawRecord r;
            r.source = source;
            bool ok = true;
            for (const char* field : {"task_id", "status", "task_type", "instruction"}) {
                if (!rec.contains(field) || !rec[field].is_string()) {
                    skip(std::string("missing required field: ") + field);
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            r.task_id = rec["task_id"].get<std::string>();
            r.status = rec["status"].get<std::string>();
            r.task_type = rec["task_type"].get<std::string>();
            r.instruction = rec["instruction"].get<std::string>();
            if (r.task_id.empty()) {
                skip("task_id is empty");
                continue;
            }
            if (rec.contains("rework_count")) {
                if (!rec["rework_count"].is_number_integer()) {
                    skip("rework_count is not an integer");
                    continue;
                }
                r.rework_count = rec["rework_count"].get<std::int64_t>();
                if (r.rework_count < 0) {
                    skip("rework_count is negative");
                    continue;
                }
            }
            result.records.push_back(std::move(r));
        }
    }
    return result;
}

std::pair<std::vector<RawRecord>, ExclusionTally> apply_inclusion(
    const std::vector<RawRecord>& records, const InclusionCriteria& criteria) {
    std::vector<RawRecord> kept;
    ExclusionTally tally;
    for (const RawRecord& r : records) {
        if (utf8_length(r.instruction) < criteria.min_length) {
            ++tally.too_short;
            continue;
        }
        if (std::find(criteria.allowed_statuses.begin(), criteria.allowed_statuses.end(),
                      r.status) == criteria.allowed_statuses.end()) {
            ++tally.bad_status;
            continue;
        }
        bool fixture = false;
        for (const std::string& prefix : criteria.excluded_prefixes) {
            if (r.task_id.rfind(prefix, 0) == 0) {
                fixture = true;
                break;
            }
        }
        if (fixture) {
            ++tally.test_fixture;
            continue;
        }
        kept.push_back(r);
        ++tally.retained;
    }
    return {std::move(kept), tally};
}

std::pair<std::vector<RawRecord>, std::int64_t> deduplicate(
    const std::vector<RawRecord>& records) {
    std::vector<RawRecord> kept;
    std::unordered_set<std::string> seen;
    std::int64_t removed = 0;
    for (const RawRecord& r : records) {
        if (seen.insert(r.instruction).second)
            kept.push_back(r);
        else
            ++removed;
    }
    return {std::move(kept), removed};
}

std::vector<Stimulus> finalize_corpus(const std::vector<RawRecord>& records) {
    if (records.size() < 3)
        throw InsufficientDataError("tercile computation needs at least 3 stimuli, got " +
                                    std::to_string(records.size()));
    std::vector<std::size_t> lengths;
    lengths.reserve(records.size());
    for (const RawRecord& r : records) lengths.push_back(utf8_length(r.instruction));
    std::vector<std::size_t> sorted = lengths;
    std::sort(sorted.begin(), sorted.end());
    // Nearest-rank cuts at the 33.3rd / 66.7th percentiles (exact thirds).
    const std::size_t n = sorted.size();
    const std::size_t cut1 = sorted[(n + 2) / 3 - 1];
    const std::size_t cut2 = sorted[(2 * n + 2) / 3 - 1];

    std::vector<Stimulus> corpus;
    corpus.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const RawRecord& r = records[i];
        Stimulus s;
        s.stimulus_id = sha256_hex16(r.instruction);
        s.instruction = r.instruction;
        s.task_type = r.task_type;
        s.source = r.source;
        s.char_length = lengths[i];
        s.est_tokens = std::int64_t((lengths[i] + 3) / 4);
        s.tercile = lengths[i] <= cut1   ? Tercile::short_bin
                    : lengths[i] <= cut2 ? Tercile::medium_bin
                                         : Tercile::long_bin;
        s.rework_count = r.rework_count;
        corpus.push_back(std::move(s));
    }
    return corpus;
}

std::string corpus_digest(std::string_view corpus_file_bytes) {
    return sha256_hex(corpus_file_bytes);
}

std::string corpus_to_jsonl(const std::vector<Stimulus>& corpus) {
    std::string out;
    for (const Stimulus& s : corpus) {
        nlohmann::ordered_json line;
        line["stimulus_id"] = s.stimulus_id;
        line["instruction"] = s.instruction;
        line["task_type"] = s.task_type;
        line["source"] = source_name(s.source);
        line["char_length"] = s.char_length;
        line["est_tokens"] = s.est_tokens;
        line["tercile"] = tercile_name(s.tercile);
        line["rework_count"] = s.rework_count;
        out += line.dump();
        out += '\n';
    }
    return out;
}

void write_corpus_jsonl(const std::vector<Stimulus>& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot write corpus file: " + path);
    out << corpus_to_jsonl(corpus);
    if (!out) throw IngestError("failed writing corpus file: " + path);
}

std::vector<Stimulus> read_corpus_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read corpus file: " + path);
    std::vector<Stimulus> corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IngestError("corpus file " + path + " line " + std::to_string(line_no) +
                              ": " + e.what());
        }
        Stimulus s;
        s.stimulus_id = j.at("stimulus_id").get<std::string>();
        s.instruction = j.at("instruction").get<std::string>();
        s.task_type = j.at("task_type").get<std::string>();
        s.source = source_from_name(j.at("source").get<std::string>());
        s.char_length = j.at("char_length").get<std::size_t>();
        s.est_tokens = j.at("est_tokens").get<std::int64_t>();
        s.tercile = tercile_from_name(j.at("tercile").get<std::string>());
        s.rework_count = j.at("rework_count").get<std::int64_t>();
        corpus.push_back(std::move(s));
    }
    return corpus;
}

void write_digest_file(const std::string& digest_hex, const std::string& artifact_path,
                       const std::string& digest_path) {
    std::ofstream out(digest_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot write digest file: " + digest_path);
    out << digest_hex << "  " << artifact_path << "\n";
}

} // namespace prct
