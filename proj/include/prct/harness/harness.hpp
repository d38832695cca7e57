#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "prct/cost_model.hpp"
#include "prct/harness/backend.hpp"
#include "prct/harness/clock.hpp"
#include "prct/trial_design.hpp"

namespace prct {

enum class TrialOutcome { success, failed_after_retries };
std::string trial_outcome_name(TrialOutcome o);

struct TrialRecord {
    std::string stimulus_id;
    Arm arm = Arm::control;
    Strategy strategy = Strategy::none;
    double target_r = 1.0;
    double realized_ratio = 1.0;
    std::string compressed_digest;
    std::optional<std::int64_t> input_tokens;
    std::optional<std::int64_t> output_tokens;
    CostBreakdown cost; // consumed cost; zero for never-billed failures
    double latency_ms = 0.0;
    TrialOutcome outcome = TrialOutcome::success;
    std::optional<ErrorKind> error_kind;
    std::optional<std::string> response_text;
    std::vector<double> attempt_epochs; // serialized as ISO-8601 UTC
};

std::string trial_record_to_json_line(const TrialRecord& r);
TrialRecord trial_record_from_json_line(const std::string& line);

// Reads a JSONL trial log. A truncated or unparseable trailing line is
// tolerated (treated as an uncommitted record); an unparseable line anywhere
// else raises CorruptLogError with its line number. A missing file yields an
// empty log.
std::vector<TrialRecord> read_trial_log(const std::string& log_path);

// Pending = allocated ids minus ids already attempted (success and
// exhausted-failure both count); with retry_failures, only successes are
// skipped. Returned in allocation-table order.
std::vector<std::string> resume_filter(const std::string& log_path, const AllocationTable& alloc,
                                       bool retry_failures = false);

struct RetryOutcome {
    BackendResult result;
    int attempts = 0;
};

// At most 1 + backoff.size() attempts, sleeping the scheduled backoff
// between failures; returns the first success or the last failure.
RetryOutcome with_retries(const std::function<BackendResult()>& call,
                          const std::vector<double>& backoff_seconds, Clock& clock);

struct RunSummary {
    std::int64_t submitted = 0;
    std::int64_t succeeded = 0;
    std::int64_t failed = 0;
};

struct RunOptions {
    bool retry_failures = false;
    // Execute every pending stimulus under the control condition instead of
    // its allocated arm (the paired-baseline pass used for similarity
    // scoring).
    bool baseline_mode = false;
};

// Executes pending trials in corpus order: compress per allocated arm, call
// the backend under the rate limit with bounded retries, and append exactly
// one record per trial to the JSONL log. A log write failure halts the run
// before the next call is issued.
RunSummary run_trials(const AllocationTable& alloc, const std::vector<Stimulus>& corpus,
                      ModelBackend& backend, const InferenceConfig& config,
                      const std::string& log_path, Clock& clock, const RunOptions& opts = {});

} // namespace prct
