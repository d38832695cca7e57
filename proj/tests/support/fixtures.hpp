#pragma once

// Shared helpers for the unit suites and the acceptance binary: exact-moment
// sample synthesis, tally-engineered corpus generation, scripted backends, and
// temp-dir plumbing.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "prct/corpus.hpp"
#include "prct/harness/backend.hpp"
#include "prct/harness/harness.hpp"
#include "prct/rng.hpp"
#include "prct/similarity.hpp"
#include "prct/stats/stats.hpp"
#include "prct/trial_design.hpp"

namespace prct::testsupport {

// Deterministic values with exact sample mean and exact sample SD (n-1
// divisor); shape is standardized normal draws.
std::vector<double> exact_moment_sample(std::size_t n, double mean, double sd,
                                        std::uint64_t seed);

// Same exact moments with a right-skewed (standardized lognormal) shape;
// stays positive when sd is large relative to the mean, the way token
// counts behave. Throws if the draw cannot satisfy positivity.
std::vector<double> exact_moment_lognormal_sample(std::size_t n, double mean, double sd,
                                                  std::uint64_t seed);

stats::Sample make_sample(const std::string& label, std::vector<double> values);

// A pseudo-word instruction of approximately target_chars characters.
std::string synth_instruction(rng::Engine& eng, std::size_t target_chars);

// Raw-record fixture engineered to hit chosen pipeline tallies: the
// retained+duplicate records split across a primary and an azure file, plus
// records that fail exactly one inclusion rule each.
struct SyntheticCorpusSpec {
    int unique_records = 1199;
    int duplicates = 138;
    int too_short = 58;
    int bad_status = 172;
    int test_fixture = 10;
    int primary_file_count = 921; // raw records in the primary file
    std::uint64_t seed = 7;
    // Lengths rise with record index (plus noise) so execution order can
    // correlate with tercile the way the censoring scenario needs.
    bool lengths_follow_index = false;
};

struct SyntheticCorpus {
    std::vector<RawRecord> primary_file;
    std::vector<RawRecord> azure_file;
};

SyntheticCorpus generate_tally_fixture_records(const SyntheticCorpusSpec& spec);

void write_raw_json(const std::vector<RawRecord>& records, const std::string& path);

// Small deterministic corpus of finalized stimuli (for randomization and
// harness tests that do not need the raw pipeline).
std::vector<Stimulus> small_corpus(std::size_t n, std::uint64_t seed,
                                   std::size_t task_types = 3);

// Corpus whose covariates are constant within each (type, tercile) cell, so
// the balance gate can actually pass at desk scale (an SMD < 0.1 gate on
// free-varying covariates needs production-sized arms).
std::vector<Stimulus> balanced_corpus(std::size_t n, std::uint64_t seed);

class TempDir {
public:
    explicit TempDir(const std::string& prefix);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const { return path_ + "/" + name; }

private:
    std::string path_;
};

// Replays a fixed script of results (the last entry repeats forever).
class ScriptedBackend final : public ModelBackend {
public:
    explicit ScriptedBackend(std::vector<BackendResult> script)
        : script_(std::move(script)) {}
    BackendResult respond(const std::string&, const std::string&, const TrialContext&,
                          const InferenceConfig&) override {
        ++calls;
        std::size_t i = std::min(next_, script_.size() - 1);
        ++next_;
        return script_[i];
    }
    int calls = 0;

private:
    std::vector<BackendResult> script_;
    std::size_t next_ = 0;
};

// Delegates to an inner backend until a call index, then fails every call
// (the execution-time credit-censoring scenario).
class FailFromCallBackend final : public ModelBackend {
public:
    FailFromCallBackend(ModelBackend& inner, std::int64_t fail_from_call)
        : inner_(inner), fail_from_(fail_from_call) {}
    BackendResult respond(const std::string& system_prompt, const std::string& user_prompt,
                          const TrialContext& ctx, const InferenceConfig& config) override {
        std::int64_t index = calls++;
        if (index >= fail_from_)
            return BackendResult::failure(ErrorKind::credit_exhausted,
                                          "credit balance exhausted");
        return inner_.respond(system_prompt, user_prompt, ctx, config);
    }
    std::int64_t calls = 0;

private:
    ModelBackend& inner_;
    std::int64_t fail_from_;
};

// Thrown to simulate a process crash mid-run (no record gets written).
struct SimulatedCrash : std::runtime_error {
    SimulatedCrash() : std::runtime_error("simulated crash") {}
};

class CrashingBackend final : public ModelBackend {
public:
    CrashingBackend(ModelBackend& inner, std::int64_t crash_at_call)
        : inner_(inner), crash_at_(crash_at_call) {}
    BackendResult respond(const std::string& system_prompt, const std::string& user_prompt,
                          const TrialContext& ctx, const InferenceConfig& config) override {
        if (calls++ == crash_at_) throw SimulatedCrash{};
        return inner_.respond(system_prompt, user_prompt, ctx, config);
    }
    std::int64_t calls = 0;

private:
    ModelBackend& inner_;
    std::int64_t crash_at_;
};

struct ExecResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

ExecResult exec_command(const std::string& command);

// ---------------------------------------------------------------------------
// Fixture synthesized from the published summary statistics of the 358-trial
// complete-case analysis set. The published tables give means, SDs and ns;
// the remaining shape parameters (input-token SD curve, output-token SDs)
// were solved once so the documented test statistics are reproduced by
// construction, and are frozen here.
// ---------------------------------------------------------------------------
struct ArmShape {
    Arm arm;
    std::int64_t assigned;       // randomized submissions
    std::int64_t successes;      // complete-case records
    double mean_in, sd_in;       // input tokens
    double mean_out, sd_out;     // output tokens
    double mean_sim, sd_sim;     // similarity scores (treatment arms)
    MicroUsd failure_cost_micro; // consumed cost of one failed submission
};

const std::vector<ArmShape>& published_arm_shapes();

struct SummaryFixture {
    std::vector<Stimulus> corpus;        // 1,199 stimuli with task types/terciles
    AllocationTable alloc;               // one row per stimulus
    std::vector<TrialRecord> log;        // all 1,199 records (358 successes)
    std::vector<ScoreRecord> scores;     // 299 treatment-arm scores
    ExclusionTally tally;                // published CONSORT tallies
};

// kw_seed picks the similarity-sample draw; the default reproduces the
// published Kruskal-Wallis H within tolerance.
SummaryFixture summary_fixture(std::uint64_t seed = 1, std::uint64_t kw_seed = 14);

} // namespace prct::testsupport
