#include "prct/trial_design.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "prct/errors.hpp"
#include "prct/rng.hpp"
#include "prct/sha256.hpp"

namespace prct {

std::string arm_name(Arm a) {
    switch (a) {
        case Arm::control: return "control";
        case Arm::light: return "light";
        case Arm::moderate: return "moderate";
        case Arm::aggressive: return "aggressive";
        case Arm::adaptive: return "adaptive";
        case Arm::recency: return "recency";
    }
    return "control";
}

Arm arm_from_name(std::string_view name) {
    for (Arm a : all_arms())
        if (arm_name(a) == name) return a;
    throw IngestError("unknown arm: " + std::string(name));
}

const std::vector<Arm>& all_arms() {
    static const std::vector<Arm> arms = {Arm::control,    Arm::light,    Arm::moderate,
                                          Arm::aggressive, Arm::adaptive, Arm::recency};
    return arms;
}

CompressionSpec spec_for_arm(Arm arm, int adaptive_chunk_chars) {
    CompressionSpec spec;
    spec.chunk_chars = adaptive_chunk_chars;
    switch (arm) {
        case Arm::control:
            spec.strategy = Strategy::none;
            spec.target_retention = 1.0;
            break;
        case Arm::light:
            spec.strategy = Strategy::uniform;
            spec.target_retention = 0.8;
            break;
        case Arm::moderate:
            spec.strategy = Strategy::uniform;
            spec.target_retention = 0.5;
            break;
        case Arm::aggressive:
            spec.strategy = Strategy::uniform;
            spec.target_retention = 0.2;
            break;
        case Arm::adaptive:
            spec.strategy = Strategy::adaptive;
            spec.target_retention = 0.5;
            break;
        case Arm::recency:
            spec.strategy = Strategy::recency;
            spec.target_retention = 0.5;
            break;
    }
    return spec;
}

std::vector<Stratum> build_strata(const std::vector<Stimulus>& corpus) {
    std::map<std::pair<std::string, int>, Stratum> by_key;
    for (const Stimulus& s : corpus) {
        auto key = std::make_pair(s.task_type, int(s.tercile));
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            Stratum st;
            st.task_type = s.task_type;
            st.tercile = s.tercile;
            it = by_key.emplace(key, std::move(st)).first;
        }
        it->second.members.push_back(s.stimulus_id);
    }
    std::vector<Stratum> strata;
    strata.reserve(by_key.size());
    for (auto& [key, st] : by_key) strata.push_back(std::move(st));
    return strata;
}

AllocationTable permuted_block_randomize(const std::vector<Stratum>& strata, std::uint64_t seed) {
    AllocationTable table;
    table.seed = seed;
    for (const Stratum& stratum : strata) {
        rng::Engine eng(rng::derive_seed(seed, stratum.key()));
        std::size_t consumed = 0;
        int block_index = 0;
        while (consumed < stratum.members.size()) {
            std::vector<Arm> block = all_arms();
            rng::shuffle(eng, block);
            std::size_t take = std::min(std::size_t(kArmCount), stratum.members.size() - consumed);
            for (std::size_t i = 0; i < take; ++i) {
                AllocationRow row;
                row.stimulus_id = stratum.members[consumed + i];
                row.arm = block[i];
                row.task_type = stratum.task_type;
                row.tercile = stratum.tercile;
                row.block_index = block_index;
                table.rows.push_back(std::move(row));
            }
            consumed += take;
            ++block_index;
        }
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const AllocationRow& a, const AllocationRow& b) {
                  return a.stimulus_id < b.stimulus_id;
              });
    table.digest = sha256_hex(table.to_csv());
    return table;
}

std::string AllocationTable::to_csv() const {
    std::string out = "stimulus_id,arm,task_type,tercile,block_index,seed\n";
    for (const AllocationRow& r : rows) {
        if (r.task_type.find(',') != std::string::npos)
            throw IngestError("task_type contains a comma, cannot serialize: " + r.task_type);
        out += r.stimulus_id;
        out += ',';
        out += arm_name(r.arm);
        out += ',';
        out += r.task_type;
        out += ',';
        out += tercile_name(r.tercile);
        out += ',';
        out += std::to_string(r.block_index);
        out += ',';
        out += std::to_string(seed);
        out += '\n';
    }
    return out;
}

AllocationTable AllocationTable::from_csv(const std::string& csv_bytes) {
    std::istringstream in(csv_bytes);
    std::string line;
    if (!std::getline(in, line) || line != "stimulus_id,arm,task_type,tercile,block_index,seed")
        throw IngestError("allocation CSV: missing or unexpected header");
    AllocationTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t pos = line.find(',', start);
            if (pos == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (fields.size() != 6)
            throw IngestError("allocation CSV line " + std::to_string(line_no) +
                              ": expected 6 fields, got " + std::to_string(fields.size()));
        AllocationRow row;
        row.stimulus_id = fields[0];
        row.arm = arm_from_name(fields[1]);
        row.task_type = fields[2];
        row.tercile = tercile_from_name(fields[3]);
        row.block_index = std::stoi(fields[4]);
        table.seed = std::uint64_t(std::stoull(fields[5]));
        table.rows.push_back(std::move(row));
    }
    table.digest = sha256_hex(csv_bytes);
    return table;
}

void write_allocation_csv(const AllocationTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot write allocation CSV: " + path);
    out << table.to_csv();
    if (!out) throw IngestError("failed writing allocation CSV: " + path);
}

AllocationTable read_allocation_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read allocation CSV: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return AllocationTable::from_csv(buf.str());
}

double smd(const stats::Sample& a, const stats::Sample& b) {
    double na = double(a.n()), nb = double(b.n());
    if (a.n() < 2 || b.n() < 2)
        throw InsufficientDataError("smd: both samples need n >= 2");
    double md = stats::mean(a.values) - stats::mean(b.values);
    double pooled = ((na - 1.0) * stats::variance(a.values) +
                     (nb - 1.0) * stats::variance(b.values)) /
                    (na + nb - 2.0);
    if (pooled == 0.0) {
        if (md == 0.0) return 0.0;
        return md > 0 ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
    }
    return md / std::sqrt(pooled);
}

BalanceReport validate_balance(const std::vector<Stimulus>& corpus, const AllocationTable& alloc,
                               double alpha, double smd_cap) {
    std::unordered_map<std::string, const Stimulus*> by_id;
    for (const Stimulus& s : corpus) by_id[s.stimulus_id] = &s;

    // Covariates per arm, plus the arm x task_type contingency table.
    std::map<Arm, stats::Sample> lengths, reworks;
    std::map<std::string, std::size_t> type_index;
    for (const AllocationRow& row : alloc.rows) {
        auto it = by_id.find(row.stimulus_id);
        if (it == by_id.end())
            throw IngestError("allocation references unknown stimulus: " + row.stimulus_id);
        const Stimulus& s = *it->second;
        lengths[row.arm].values.push_back(double(s.char_length));
        reworks[row.arm].values.push_back(double(s.rework_count));
        type_index.emplace(s.task_type, type_index.size());
    }
    std::vector<Arm> arms_present;
    for (auto& [arm, sample] : lengths) {
        sample.label = arm_name(arm);
        reworks[arm].label = arm_name(arm);
        arms_present.push_back(arm);
        if (sample.n() < 2)
            throw InsufficientDataError("balance checks: arm '" + arm_name(arm) +
                                        "' has fewer than 2 members");
    }

    BalanceReport report;

    if (arms_present.size() < 2 || type_index.size() < 2) {
        report.chi2_arm_by_tasktype.test_name = "chi_square_independence";
        report.chi2_arm_by_tasktype.statistic = 0.0;
        report.chi2_arm_by_tasktype.p_value = 1.0;
        report.chi2_arm_by_tasktype.notes.push_back(
            "single arm or task type; independence trivially satisfied");
    } else {
        std::vector<std::vector<double>> table(arms_present.size(),
                                               std::vector<double>(type_index.size(), 0.0));
        std::map<Arm, std::size_t> arm_index;
        for (std::size_t i = 0; i < arms_present.size(); ++i) arm_index[arms_present[i]] = i;
        for (const AllocationRow& row : alloc.rows)
            table[arm_index[row.arm]][type_index[by_id[row.stimulus_id]->task_type]] += 1.0;
        report.chi2_arm_by_tasktype = stats::chi_square_independence(table);
    }

    std::vector<stats::Sample> length_groups, rework_groups;
    for (Arm arm : arms_present) {
        length_groups.push_back(lengths[arm]);
        rework_groups.push_back(reworks[arm]);
    }
    report.anova_length = stats::classic_anova(length_groups);
    report.kw_rework = stats::kruskal_wallis(rework_groups);

    report.max_pairwise_smd = 0.0;
    for (std::size_t i = 0; i < arms_present.size(); ++i) {
        for (std::size_t j = i + 1; j < arms_present.size(); ++j) {
            for (const char* cov : {"char_length", "rework_count"}) {
                const auto& groups = std::string_view(cov) == "char_length" ? lengths : reworks;
                SmdEntry entry;
                entry.covariate = cov;
                entry.arm_a = arms_present[i];
                entry.arm_b = arms_present[j];
                entry.value = smd(groups.at(arms_present[i]), groups.at(arms_present[j]));
                report.max_pairwise_smd =
                    std::max(report.max_pairwise_smd, std::fabs(entry.value));
                report.smds.push_back(std::move(entry));
            }
        }
    }

    if (!(report.chi2_arm_by_tasktype.p_value > alpha))
        report.failing_checks.push_back("chi_square_arm_by_task_type");
    if (!(report.anova_length.p_value > alpha))
        report.failing_checks.push_back("anova_char_length");
    if (!(report.kw_rework.p_value > alpha))
        report.failing_checks.push_back("kruskal_wallis_rework");
    if (!(report.max_pairwise_smd < smd_cap))
        report.failing_checks.push_back("max_pairwise_smd");
    report.passed = report.failing_checks.empty();
    return report;
}

RerandomizeResult rerandomize_until_balanced(const std::vector<Stimulus>& corpus,
                                             std::uint64_t seed0, int max_attempts, double alpha,
                                             double smd_cap) {
    if (max_attempts < 1)
        throw DegenerateInputError("rerandomize_until_balanced needs max_attempts >= 1");
    std::vector<Stratum> strata = build_strata(corpus);
    RerandomizeResult best;
    std::size_t best_failures = SIZE_MAX;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::uint64_t seed = seed0 + std::uint64_t(attempt);
        AllocationTable table = permuted_block_randomize(strata, seed);
        BalanceReport report = validate_balance(corpus, table, alpha, smd_cap);
        if (report.passed) {
            return {std::move(table), std::move(report), attempt + 1};
        }
        if (report.failing_checks.size() < best_failures) {
            best_failures = report.failing_checks.size();
            best.table = std::move(table);
            best.report = std::move(report);
            best.attempts_used = attempt + 1;
        }
    }
    std::string msg = "no balanced allocation in " + std::to_string(max_attempts) +
                      " attempts (seeds " + std::to_string(seed0) + ".." +
                      std::to_string(seed0 + std::uint64_t(max_attempts) - 1) +
                      "); best attempt failed:";
    for (const std::string& check : best.report.failing_checks) msg += " " + check;
    throw NoBalancedAllocationError(msg);
}

} // namespace prct
