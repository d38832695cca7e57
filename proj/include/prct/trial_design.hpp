#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "prct/compression.hpp"
#include "prct/corpus.hpp"
#include "prct/stats/stats.hpp"

namespace prct {

enum class Arm { control, light, moderate, aggressive, adaptive, recency };
inline constexpr int kArmCount = 6;

std::string arm_name(Arm a);
Arm arm_from_name(std::string_view name);
const std::vector<Arm>& all_arms();

// The six treatment conditions' compression settings.
CompressionSpec spec_for_arm(Arm arm, int adaptive_chunk_chars = 200);

struct Stratum {
    std::string task_type;
    Tercile tercile = Tercile::short_bin;
    std::vector<std::string> members; // stimulus ids, corpus order
    std::string key() const { return task_type + "|" + tercile_name(tercile); }
};

struct AllocationRow {
    std::string stimulus_id;
    Arm arm = Arm::control;
    std::string task_type;
    Tercile tercile = Tercile::short_bin;
    int block_index = 0;
};

struct AllocationTable {
    std::vector<AllocationRow> rows; // sorted by stimulus_id
    std::uint64_t seed = 0;
    std::string digest; // SHA-256 of the CSV serialization

    std::string to_csv() const;
    static AllocationTable from_csv(const std::string& csv_bytes);
};

void write_allocation_csv(const AllocationTable& table, const std::string& path);
AllocationTable read_allocation_csv(const std::string& path);

// Strata keyed by (task_type, tercile), members in corpus order, empty
// strata omitted. Deterministic key order.
std::vector<Stratum> build_strata(const std::vector<Stimulus>& corpus);

// Permuted blocks of size 6 within each stratum; a fresh uniform
// permutation of the six arms per block, a random prefix for a partial
// final block. Per-stratum RNG streams are derived by hashing
// (seed, stratum key), so strata are order-independent.
AllocationTable permuted_block_randomize(const std::vector<Stratum>& strata, std::uint64_t seed);

struct SmdEntry {
    std::string covariate;
    Arm arm_a = Arm::control;
    Arm arm_b = Arm::control;
    double value = 0.0;
};

struct BalanceReport {
    stats::TestReport chi2_arm_by_tasktype;
    stats::TestReport anova_length;
    stats::TestReport kw_rework;
    std::vector<SmdEntry> smds;
    double max_pairwise_smd = 0.0;
    bool passed = false;
    std::vector<std::string> failing_checks;
};

// Pairwise standardized mean difference with pooled-SD denominator.
double smd(const stats::Sample& a, const stats::Sample& b);

// The four pre-experiment balance checks.
BalanceReport validate_balance(const std::vector<Stimulus>& corpus, const AllocationTable& alloc,
                               double alpha = 0.05, double smd_cap = 0.1);

struct RerandomizeResult {
    AllocationTable table;
    BalanceReport report;
    int attempts_used = 0;
};

// Tries seeds seed0, seed0+1, ... until the balance gate passes. Throws
// NoBalancedAllocationError (reporting the best attempt's failing checks)
// when max_attempts is exhausted.
RerandomizeResult rerandomize_until_balanced(const std::vector<Stimulus>& corpus,
                                             std::uint64_t seed0, int max_attempts,
                                             double alpha = 0.05, double smd_cap = 0.1);

} // namespace prct
