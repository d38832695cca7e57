#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prct {

enum class Source { primary, azure };
std::string source_name(Source s);
Source source_from_name(std::string_view name);

enum class Tercile { short_bin, medium_bin, long_bin };
std::string tercile_name(Tercile t);
Tercile tercile_from_name(std::string_view name);

struct RawRecord {
    std::string task_id;
    std::string status;
    std::string task_type;
    std::string instruction;
    std::int64_t rework_count = 0;
    Source source = Source::primary;
};

struct Stimulus {
    std::string stimulus_id; // first 16 hex chars of SHA-256(instruction)
    std::string instruction;
    std::string task_type;
    Source source = Source::primary;
    std::size_t char_length = 0; // Unicode scalars
    std::int64_t est_tokens = 0; // ceil(char_length / 4)
    Tercile tercile = Tercile::short_bin;
    std::int64_t rework_count = 0;
};

struct InclusionCriteria {
    std::size_t min_length = 20;
    std::vector<std::string> allowed_statuses = {"completed", "assigned"};
    std::vector<std::string> excluded_prefixes = {
        "task-fail-",      "task-consistency-", "task-values-", "task-error-",
        "task-exhausted-", "task-orch-",        "task-engine-", "task-other-",
        "task-at-max-",    "task-over-max-",    "task-timeout-"};
};

struct ExclusionTally {
    std::int64_t too_short = 0;
    std::int64_t bad_status = 0;
    std::int64_t test_fixture = 0;
    std::int64_t duplicates = 0;
    std::int64_t retained = 0;
    std::int64_t total() const {
        return too_short + bad_status + test_fixture + duplicates + retained;
    }
};

struct RecordSkip {
    std::string path;
    std::size_t index = 0; // position within the file's array
    std::string reason;
};

struct LoadResult {
    std::vector<RawRecord> records;
    std::vector<RecordSkip> skips;
};

// Reads JSON-array files of raw records, tagging each file's records with
// its configured source. Unreadable or non-array input is fatal; records
// missing required fields are skipped and reported.
LoadResult load_records(const std::vector<std::pair<std::string, Source>>& paths);

// Pre-registered filter. A record is kept iff its instruction has at least
// min_length characters AND its status is allowed AND its task_id matches no
// excluded prefix; tallies count the first failing rule in that order.
std::pair<std::vector<RawRecord>, ExclusionTally> apply_inclusion(
    const std::vector<RawRecord>& records, const InclusionCriteria& criteria);

// Keeps the first occurrence (input order) of each exact instruction text.
std::pair<std::vector<RawRecord>, std::int64_t> deduplicate(
    const std::vector<RawRecord>& records);

// Computes features, corpus-level tercile cuts (nearest-rank thirds; values
// strictly above a cut go to the next bin), and stable stimulus ids.
// Requires at least 3 records.
std::vector<Stimulus> finalize_corpus(const std::vector<RawRecord>& records);

// Lowercase hex SHA-256 of the exact serialized corpus bytes.
std::string corpus_digest(std::string_view corpus_file_bytes);

// JSONL, one stimulus per line, fixed key order (stimulus_id, instruction,
// task_type, source, char_length, est_tokens, tercile, rework_count).
std::string corpus_to_jsonl(const std::vector<Stimulus>& corpus);
void write_corpus_jsonl(const std::vector<Stimulus>& corpus, const std::string& path);
std::vector<Stimulus> read_corpus_jsonl(const std::string& path);

// Companion digest file: "<hex>  <path>\n".
void write_digest_file(const std::string& digest_hex, const std::string& artifact_path,
                       const std::string& digest_path);

} // namespace prct
