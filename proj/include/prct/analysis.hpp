#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prct/harness/harness.hpp"
#include "prct/similarity.hpp"
#include "prct/trial_design.hpp"

namespace prct {

struct ArmSummary {
    Arm arm = Arm::control;
    std::int64_t n = 0; // successful records
    double mean_in_tokens = 0.0;
    double mean_out_tokens = 0.0;
    double mean_cost_usd = 0.0;
    std::optional<double> savings_pct;     // vs control arm means, >0 cheaper
    std::optional<double> mean_similarity; // control fixed at 1.0 by definition
    std::optional<double> pct_preserved;
};

struct ParetoInput {
    Arm arm = Arm::control;
    double cost = 0.0;
    double similarity = 0.0;
};

struct ParetoPoint {
    Arm arm = Arm::control;
    double cost = 0.0;
    double similarity = 0.0;
    bool dominated = false;
};

struct AnalysisConfig {
    std::string population = "complete_case"; // or "all_submitted"
    int bootstrap_B = 10000;
    int n_perm = 10000;
    std::uint64_t seed = 20260115;
    double preserved_threshold = 0.85;
    double h4_savings_target = 0.30;
    double h4_similarity_target = 0.85;
    double normality_supplement_alpha = 0.01;
};

// Last record per stimulus wins; --retry-failures appends a fresh record
// for re-queued failures and readers must not double count.
std::vector<TrialRecord> dedupe_latest(const std::vector<TrialRecord>& log);

// Complete-case means per arm; savings from arm mean costs vs control.
// Throws InsufficientDataError when the control arm is absent.
std::vector<ArmSummary> arm_summaries(const std::vector<TrialRecord>& log,
                                      const std::vector<ScoreRecord>* scores = nullptr,
                                      double preserved_threshold = 0.85);

// Strict-dominance filter (lower cost, higher similarity). Control points
// are excluded from the candidate set unless include_control is set.
std::vector<ParetoPoint> pareto_frontier(const std::vector<ParetoInput>& points,
                                         bool include_control = false);

// The pre-registered H1-H5 analyses as a structured document. Task types
// come from the allocation table (trial records do not carry them).
nlohmann::ordered_json hypothesis_suite(const std::vector<TrialRecord>& log,
                                        const std::vector<ScoreRecord>& scores,
                                        const AllocationTable& alloc,
                                        const AnalysisConfig& config);

struct MissingnessReport {
    struct ArmCell {
        Arm arm = Arm::control;
        std::int64_t submitted = 0;
        std::int64_t succeeded = 0;
        std::int64_t failed = 0;
    };
    struct TercileCell {
        Tercile tercile = Tercile::short_bin;
        std::int64_t submitted = 0;
        std::int64_t succeeded = 0;
        double success_rate = 0.0;
    };
    struct HourCell {
        std::int64_t hour_offset = 0; // hours since the first attempt's hour
        std::int64_t attempts = 0;
        std::int64_t successes = 0;
        double success_rate = 0.0;
    };
    std::vector<ArmCell> per_arm;
    std::vector<TercileCell> per_tercile;
    std::vector<HourCell> per_hour;
    nlohmann::ordered_json composition_shift; // full vs complete-case table

    nlohmann::ordered_json to_json() const;
};

// Failure accounting against the full allocation. The corpus (when given)
// adds the composition-shift columns that need per-stimulus features.
MissingnessReport missingness_report(const AllocationTable& alloc,
                                     const std::vector<TrialRecord>& log,
                                     const std::vector<Stimulus>* corpus = nullptr);

struct SensitivityRow {
    Arm arm = Arm::control;
    std::int64_t assigned = 0;
    std::int64_t successful = 0;
    double mean_cost_usd = 0.0; // over all submitted records, failures included
    double successes_per_dollar = 0.0;
    std::optional<double> cost_reduction_vs_control;
};

std::vector<SensitivityRow> assignment_sensitivity(const AllocationTable& alloc,
                                                   const std::vector<TrialRecord>& log);
nlohmann::ordered_json sensitivity_to_json(const std::vector<SensitivityRow>& rows);

// CONSORT flow accounting with arithmetic closure at every level.
nlohmann::ordered_json consort_counts(const ExclusionTally& tally, const AllocationTable& alloc,
                                      const std::vector<TrialRecord>& log);

nlohmann::ordered_json arm_summaries_to_json(const std::vector<ArmSummary>& summaries);
nlohmann::ordered_json test_report_to_json(const stats::TestReport& r);
nlohmann::ordered_json balance_report_to_json(const BalanceReport& report);

// The full results document written by `analyze`: arm summaries, H1-H5,
// missingness, sensitivity, CONSORT, seeds, and population label.
nlohmann::ordered_json build_results_document(const std::vector<TrialRecord>& log,
                                              const std::vector<ScoreRecord>& scores,
                                              const AllocationTable& alloc,
                                              const ExclusionTally& tally,
                                              const std::vector<Stimulus>& corpus,
                                              const AnalysisConfig& config);

} // namespace prct
