#include "prct/harness/harness.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "prct/errors.hpp"
#include "prct/harness/rate_limiter.hpp"
#include "prct/sha256.hpp"
#include "prct/timefmt.hpp"

namespace prct {

namespace {

// Exact micro-USD from the decimal string form used in the log.
MicroUsd parse_usd(const std::string& s) {
    bool neg = !s.empty() && s[0] == '-';
    std::size_t i = neg ? 1 : 0;
    MicroUsd whole = 0;
    while (i < s.size() && s[i] != '.') {
        if (s[i] < '0' || s[i] > '9') throw IngestError("bad USD literal: " + s);
        whole = whole * 10 + (s[i] - '0');
        ++i;
    }
    MicroUsd frac = 0;
    int digits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size()) {
            if (s[i] < '0' || s[i] > '9' || digits >= 6)
                throw IngestError("bad USD literal: " + s);
            frac = frac * 10 + (s[i] - '0');
            ++digits;
            ++i;
        }
    }
    while (digits < 6) {
        frac *= 10;
        ++digits;
    }
    MicroUsd v = whole * 1000000 + frac;
    return neg ? -v : v;
}

double parse_iso8601(const std::string& ts) {
    int y, mo, d, h, mi, s, ms = 0;
    if (std::sscanf(ts.c_str(), "%d-%d-%dT%d:%d:%d.%dZ", &y, &mo, &d, &h, &mi, &s, &ms) < 6)
        throw IngestError("bad ISO-8601 timestamp: " + ts);
    return double(epoch_from_civil(y, mo, d, h, mi, s)) + double(ms) / 1000.0;
}

} // namespace

std::string trial_outcome_name(TrialOutcome o) {
    return o == TrialOutcome::success ? "success" : "failed_after_retries";
}

std::string trial_record_to_json_line(const TrialRecord& r) {
    nlohmann::ordered_json j;
    j["stimulus_id"] = r.stimulus_id;
    j["arm"] = arm_name(r.arm);
    j["strategy"] = strategy_name(r.strategy);
    j["target_r"] = r.target_r;
    j["realized_ratio"] = r.realized_ratio;
    j["compressed_digest"] = r.compressed_digest;
    if (r.input_tokens) j["input_tokens"] = *r.input_tokens;
    if (r.output_tokens) j["output_tokens"] = *r.output_tokens;
    j["cost"] = {{"input_cost", usd_string(r.cost.input_cost)},
                 {"output_cost", usd_string(r.cost.output_cost)},
                 {"total", usd_string(r.cost.total)}};
    j["latency_ms"] = r.latency_ms;
    j["outcome"] = trial_outcome_name(r.outcome);
    if (r.error_kind) j["error_kind"] = error_kind_name(*r.error_kind);
    if (r.response_text) j["response_text"] = *r.response_text;
    nlohmann::json stamps = nlohmann::json::array();
    for (double t : r.attempt_epochs) stamps.push_back(iso8601_utc(t));
    j["attempt_timestamps"] = stamps;
    return j.dump();
}

TrialRecord trial_record_from_json_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    TrialRecord r;
    r.stimulus_id = j.at("stimulus_id").get<std::string>();
    r.arm = arm_from_name(j.at("arm").get<std::string>());
    r.strategy = strategy_from_name(j.at("strategy").get<std::string>());
    r.target_r = j.at("target_r").get<double>();
    r.realized_ratio = j.at("realized_ratio").get<double>();
    r.compressed_digest = j.at("compressed_digest").get<std::string>();
    if (j.contains("input_tokens")) r.input_tokens = j["input_tokens"].get<std::int64_t>();
    if (j.contains("output_tokens")) r.output_tokens = j["output_tokens"].get<std::int64_t>();
    const auto& cost = j.at("cost");
    r.cost.input_cost = parse_usd(cost.at("input_cost").get<std::string>());
    r.cost.output_cost = parse_usd(cost.at("output_cost").get<std::string>());
    r.cost.total = parse_usd(cost.at("total").get<std::string>());
    r.latency_ms = j.at("latency_ms").get<double>();
    std::string outcome = j.at("outcome").get<std::string>();
    if (outcome == "success")
        r.outcome = TrialOutcome::success;
    else if (outcome == "failed_after_retries")
        r.outcome = TrialOutcome::failed_after_retries;
    else
        throw IngestError("unknown trial outcome: " + outcome);
    if (j.contains("error_kind"))
        r.error_kind = error_kind_from_name(j["error_kind"].get<std::string>());
    if (j.contains("response_text")) r.response_text = j["response_text"].get<std::string>();
    for (const auto& ts : j.at("attempt_timestamps"))
        r.attempt_epochs.push_back(parse_iso8601(ts.get<std::string>()));
    return r;
}

std::vector<TrialRecord> read_trial_log(const std::string& log_path) {
    std::ifstream in(log_path, std::ios::binary);
    std::vector<TrialRecord> records;
    if (!in) return records; // cold start
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            records.push_back(trial_record_from_json_line(lines[i]));
        } catch (const std::exception& e) {
            if (i + 1 == lines.size()) break; // truncated trailing line: uncommitted
            throw CorruptLogError("trial log " + log_path + " line " + std::to_string(i + 1) +
                                      " is unparseable: " + e.what(),
                                  i + 1);
        }
    }
    return records;
}

std::vector<std::string> resume_filter(const std::string& log_path, const AllocationTable& alloc,
                                       bool retry_failures) {
    std::unordered_set<std::string> done;
    for (const TrialRecord& r : read_trial_log(log_path)) {
        if (retry_failures && r.outcome == TrialOutcome::failed_after_retries) continue;
        done.insert(r.stimulus_id);
    }
    std::vector<std::string> pending;
    for (const AllocationRow& row : alloc.rows)
        if (!done.count(row.stimulus_id)) pending.push_back(row.stimulus_id);
    return pending;
}

RetryOutcome with_retries(const std::function<BackendResult()>& call,
                          const std::vector<double>& backoff_seconds, Clock& clock) {
    RetryOutcome out;
    const std::size_t max_attempts = 1 + backoff_seconds.size();
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        out.result = call();
        ++out.attempts;
        if (out.result.ok()) return out;
        if (attempt + 1 < max_attempts) clock.sleep_for(backoff_seconds[attempt]);
    }
    return out;
}

RunSummary run_trials(const AllocationTable& alloc, const std::vector<Stimulus>& corpus,
                      ModelBackend& backend, const InferenceConfig& config,
                      const std::string& log_path, Clock& clock, const RunOptions& opts) {
    std::unordered_map<std::string, const AllocationRow*> row_by_id;
    for (const AllocationRow& row : alloc.rows) row_by_id[row.stimulus_id] = &row;

    std::vector<std::string> pending_list = resume_filter(log_path, alloc, opts.retry_failures);
    std::unordered_set<std::string> pending(pending_list.begin(), pending_list.end());

    std::ofstream log(log_path, std::ios::binary | std::ios::app);
    if (!log) throw Error("cannot open trial log for append: " + log_path);

    TokenBucket limiter(config.rpm_limit, config.rpm_limit / 60.0);
    RunSummary summary;

    for (const Stimulus& stimulus : corpus) {
        if (!pending.count(stimulus.stimulus_id)) continue;
        const AllocationRow* row = row_by_id[stimulus.stimulus_id];
        if (!row) continue;

        Arm arm = opts.baseline_mode ? Arm::control : row->arm;
        CompressionSpec spec = spec_for_arm(arm, config.adaptive_chunk_chars);
        CompressionOutcome compressed = compress(stimulus.instruction, spec);

        TrialContext ctx;
        ctx.stimulus_digest = stimulus.stimulus_id;
        ctx.realized_ratio = compressed.realized_ratio;

        std::vector<double> attempt_epochs;
        auto attempt = [&]() -> BackendResult {
            double permitted_at = limiter.acquire(clock);
            attempt_epochs.push_back(permitted_at);
            return backend.respond(config.system_prompt, compressed.compressed_text, ctx, config);
        };
        RetryOutcome outcome = with_retries(attempt, config.retry_backoff_seconds, clock);

        TrialRecord record;
        record.stimulus_id = stimulus.stimulus_id;
        record.arm = arm;
        record.strategy = spec.strategy;
        record.target_r = spec.target_retention;
        record.realized_ratio = compressed.realized_ratio;
        record.compressed_digest = sha256_hex16(compressed.compressed_text);
        record.attempt_epochs = std::move(attempt_epochs);
        if (outcome.result.ok()) {
            const ModelResponse& resp = *outcome.result.response;
            record.input_tokens = resp.input_tokens;
            record.output_tokens = resp.output_tokens;
            record.cost = trial_cost({resp.input_tokens, resp.output_tokens}, config.pricing);
            record.latency_ms = resp.latency_ms;
            record.outcome = TrialOutcome::success;
            record.response_text = resp.text;
            ++summary.succeeded;
        } else {
            record.outcome = TrialOutcome::failed_after_retries;
            record.error_kind = outcome.result.error->kind;
            ++summary.failed;
        }
        ++summary.submitted;

        log << trial_record_to_json_line(record) << '\n';
        log.flush();
        if (!log) throw Error("trial log write failure, halting run: " + log_path);
    }
    return summary;
}

} // namespace prct
