#include "support/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "prct/sha256.hpp"
#include "prct/text.hpp"

namespace prct::testsupport {

std::vector<double> exact_moment_sample(std::size_t n, double mean, double sd,
                                        std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("exact_moment_sample needs n >= 2");
    rng::Engine eng(seed);
    std::vector<double> z(n);
    for (double& v : z) v = rng::standard_normal(eng);
    double m = 0.0;
    for (double v : z) m += v;
    m /= double(n);
    double ss = 0.0;
    for (double v : z) ss += (v - m) * (v - m);
    double s = std::sqrt(ss / double(n - 1));
    if (s == 0.0) throw std::runtime_error("degenerate draw");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = mean + sd * (z[i] - m) / s;
    return out;
}

stats::Sample make_sample(const std::string& label, std::vector<double> values) {
    stats::Sample s;
    s.label = label;
    s.values = std::move(values);
    return s;
}

std::string synth_instruction(rng::Engine& eng, std::size_t target_chars) {
    static const std::array<const char*, 12> vocab = {
        "implement", "validate", "review",   "the",     "module",  "interface",
        "pipeline",  "config",   "endpoint", "metrics", "handler", "schema"};
    std::string out;
    while (out.size() < target_chars) {
        if (!out.empty()) out += ' ';
        out += vocab[rng::bounded(eng, vocab.size())];
        // occasional synthetic identifier keeps texts distinct
        if (rng::bounded(eng, 4) == 0) {
            out += '-';
            out += std::to_string(rng::bounded(eng, 100000));
        }
    }
    if (out.size() > target_chars && target_chars > 0) {
        out.resize(target_chars);
        // avoid a trailing half word becoming whitespace-only
        if (out.back() == ' ') out.back() = 'x';
    }
    return out;
}

namespace {

const std::array<std::pair<const char*, double>, 7> kTaskTypeMix = {{
    {"implementation", 0.590},
    {"breakdown", 0.133},
    {"validation", 0.128},
    {"post-orchestration", 0.065},
    {"review", 0.057},
    {"execution", 0.019},
    {"infrastructure", 0.008},
}};

std::string pick_task_type(rng::Engine& eng) {
    double u = rng::uniform01(eng);
    double acc = 0.0;
    for (const auto& [name, share] : kTaskTypeMix) {
        acc += share;
        if (u <= acc) return name;
    }
    return "implementation";
}

} // namespace

SyntheticCorpus generate_tally_fixture_records(const SyntheticCorpusSpec& spec) {
    rng::Engine eng(spec.seed);
    std::vector<RawRecord> all;

    // Retained records: unique instructions, lengths either index-driven or
    // drawn from a right-skewed mix.
    std::vector<RawRecord> retained;
    for (int i = 0; i < spec.unique_records; ++i) {
        RawRecord r;
        r.task_id = "task-ok-" + std::to_string(i);
        r.status = rng::bounded(eng, 2) == 0 ? "completed" : "assigned";
        r.task_type = pick_task_type(eng);
        std::size_t len;
        if (spec.lengths_follow_index) {
            // noisy upward drift with a long-tail component, so length
            // correlates with position without determining it
            double base = 40.0 + 1500.0 * double(i) / double(spec.unique_records);
            double jitter = double(rng::bounded(eng, 900));
            if (rng::bounded(eng, 100) < 8) jitter += double(rng::bounded(eng, 3000));
            len = std::size_t(base + jitter);
        } else {
            std::size_t mode = rng::bounded(eng, 10);
            if (mode < 5)
                len = 25 + rng::bounded(eng, 300);
            else if (mode < 9)
                len = 300 + rng::bounded(eng, 900);
            else
                len = 1200 + rng::bounded(eng, 4000);
        }
        // nail uniqueness regardless of generator collisions
        r.instruction = "[" + std::to_string(i) + "] " + synth_instruction(eng, len);
        r.rework_count = std::int64_t(rng::bounded(eng, 4));
        retained.push_back(std::move(r));
    }

    // Cross-environment duplicates: azure copies of primary instructions.
    std::vector<RawRecord> duplicates;
    for (int i = 0; i < spec.duplicates; ++i) {
        RawRecord dup = retained[std::size_t(i) % retained.size()];
        dup.task_id = "task-dup-" + std::to_string(i);
        dup.source = Source::azure;
        duplicates.push_back(std::move(dup));
    }

    std::vector<RawRecord> excluded;
    for (int i = 0; i < spec.too_short; ++i) {
        RawRecord r;
        r.task_id = "task-short-" + std::to_string(i);
        r.status = "completed";
        r.task_type = "implementation";
        r.instruction = synth_instruction(eng, 5 + rng::bounded(eng, 14)); // < 20 chars
        excluded.push_back(std::move(r));
    }
    static const std::array<const char*, 3> bad = {"failed", "exhausted", "timeout"};
    for (int i = 0; i < spec.bad_status; ++i) {
        RawRecord r;
        r.task_id = "task-badstatus-" + std::to_string(i);
        r.status = bad[rng::bounded(eng, bad.size())];
        r.task_type = pick_task_type(eng);
        r.instruction = "[bad " + std::to_string(i) + "] " + synth_instruction(eng, 80);
        excluded.push_back(std::move(r));
    }
    static const std::array<const char*, 11> fixture_prefixes = {
        "task-fail-",      "task-consistency-", "task-values-", "task-error-",
        "task-exhausted-", "task-orch-",        "task-engine-", "task-other-",
        "task-at-max-",    "task-over-max-",    "task-timeout-"};
    for (int i = 0; i < spec.test_fixture; ++i) {
        RawRecord r;
        r.task_id = std::string(fixture_prefixes[std::size_t(i) % fixture_prefixes.size()]) +
                    std::to_string(i);
        r.status = "completed";
        r.task_type = "implementation";
        r.instruction = "[fixture " + std::to_string(i) + "] " + synth_instruction(eng, 80);
        excluded.push_back(std::move(r));
    }

    all = retained;
    all.insert(all.end(), duplicates.begin(), duplicates.end());
    all.insert(all.end(), excluded.begin(), excluded.end());

    // Keep corpus order stable; the duplicate copies must come after their
    // primary originals so first-in-input-order wins.
    SyntheticCorpus out;
    int total = int(all.size());
    if (spec.primary_file_count > total)
        throw std::invalid_argument("primary_file_count exceeds record total");
    for (int i = 0; i < total; ++i) {
        RawRecord& r = all[std::size_t(i)];
        if (i < spec.primary_file_count) {
            r.source = Source::primary;
            out.primary_file.push_back(std::move(r));
        } else {
            r.source = Source::azure;
            out.azure_file.push_back(std::move(r));
        }
    }
    return out;
}

void write_raw_json(const std::vector<RawRecord>& records, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const RawRecord& r : records) {
        nlohmann::json j;
        j["task_id"] = r.task_id;
        j["status"] = r.status;
        j["task_type"] = r.task_type;
        j["instruction"] = r.instruction;
        j["rework_count"] = r.rework_count;
        arr.push_back(std::move(j));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write fixture: " + path);
    out << arr.dump(1) << "\n";
}

std::vector<Stimulus> small_corpus(std::size_t n, std::uint64_t seed, std::size_t task_types) {
    rng::Engine eng(seed);
    std::vector<RawRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
        RawRecord r;
        r.task_id = "task-ok-" + std::to_string(i);
        r.status = "completed";
        r.task_type = "type" + std::to_string(i % task_types);
        r.instruction =
            "[" + std::to_string(i) + "] " + synth_instruction(eng, 30 + rng::bounded(eng, 600));
        r.rework_count = std::int64_t(rng::bounded(eng, 3));
        r.source = i % 3 == 0 ? Source::azure : Source::primary;
        records.push_back(std::move(r));
    }
    return finalize_corpus(records);
}

std::vector<Stimulus> balanced_corpus(std::size_t n, std::uint64_t seed) {
    rng::Engine eng(seed);
    const std::size_t tercile_len[3] = {120, 480, 960};
    std::vector<RawRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
        RawRecord r;
        r.task_id = "task-ok-" + std::to_string(i);
        r.status = "completed";
        r.task_type = "type" + std::to_string(i % 2);
        std::size_t len = tercile_len[(i / 2) % 3];
        std::string text = "[" + std::to_string(i) + "] " + synth_instruction(eng, len);
        text.resize(len, 'p'); // exact per-tercile length
        r.instruction = std::move(text);
        r.rework_count = 0;
        records.push_back(std::move(r));
    }
    return finalize_corpus(records);
}

TempDir::TempDir(const std::string& prefix) {
    auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        auto candidate = base / (prefix + "_" + std::to_string(::getpid()) + "_" +
                                 std::to_string(attempt));
        std::error_code ec;
        if (std::filesystem::create_directories(candidate, ec)) {
            path_ = candidate.string();
            return;
        }
    }
    throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

ExecResult exec_command(const std::string& command) {
    ExecResult result;
    std::string cmd = command + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) result.output.append(buf, got);
    int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::vector<double> exact_moment_lognormal_sample(std::size_t n, double mean, double sd,
                                                  std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("exact_moment_lognormal_sample needs n >= 2");
    // Deterministic right-skewed quantile shape: powered exponential
    // quantiles concentrate the spread in the upper tail, so after
    // standardization the minimum sits well above -(mean/sd) for token-like
    // moment profiles. The seed only shuffles the order.
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        double u = (double(i) + 0.5) / double(n);
        z[i] = std::pow(-std::log1p(-u), 1.5);
    }
    double m = 0.0;
    for (double v : z) m += v;
    m /= double(n);
    double ss = 0.0;
    for (double v : z) ss += (v - m) * (v - m);
    double s = std::sqrt(ss / double(n - 1));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = mean + sd * (z[i] - m) / s;
    for (double v : out)
        if (v <= 0.0)
            throw std::runtime_error("skewed fixture shape violated positivity for mean/sd " +
                                     std::to_string(mean) + "/" + std::to_string(sd));
    rng::Engine eng(seed);
    rng::shuffle(eng, out);
    return out;
}

const std::vector<ArmShape>& published_arm_shapes() {
    // Means and ns are the published complete-case summaries. Input-token
    // SDs follow sd = 0.04158675 * mean^1.612384 (solved so the four-arm
    // Welch ANOVA lands at F = 29.40 with df2 = 114.09); control/aggressive
    // output SDs were solved the same way for t(101.67) = 0.18; the
    // remaining output SDs and per-failure consumed costs were solved from
    // the assignment-level sensitivity table. Similarity means/SDs sit
    // within the rounding brackets of the published table.
    static const std::vector<ArmShape> shapes = {
        {Arm::control, 197, 59, 107.0, 77.821915, 916.0, 690.791477, 0.0, 0.0, 672},
        {Arm::light, 199, 60, 88.0, 56.781739, 788.0, 900.0, 0.763501, 0.082478, 499},
        {Arm::moderate, 201, 60, 61.0, 31.448007, 664.0, 450.0, 0.723587, 0.092345, 325},
        {Arm::aggressive, 202, 61, 40.0, 15.925448, 946.0, 1095.935924, 0.623486, 0.138381, 140},
        {Arm::adaptive, 199, 59, 74.0, 42.931, 786.0, 900.0, 0.757505, 0.088443, 450},
        {Arm::recency, 201, 59, 65.0, 34.829, 704.0, 800.0, 0.728209, 0.100356, 328},
    };
    return shapes;
}

SummaryFixture summary_fixture(std::uint64_t seed, std::uint64_t kw_seed) {
    SummaryFixture fx;
    fx.tally.too_short = 58;
    fx.tally.bad_status = 172;
    fx.tally.test_fixture = 10;
    fx.tally.duplicates = 138;
    fx.tally.retained = 1199;

    // Tercile marginals (submitted / successes).
    const std::int64_t terc_submitted[3] = {400, 401, 398};
    std::int64_t terc_success_left[3] = {277, 75, 6};
    std::int64_t terc_fail_left[3] = {terc_submitted[0] - 277, terc_submitted[1] - 75,
                                      terc_submitted[2] - 6};
    const std::size_t terc_chars[3] = {100, 400, 1660};

    // Task types: successes live in three manual types; the rest fail.
    std::vector<std::pair<std::string, std::int64_t>> success_types = {
        {"implementation", 176}, {"breakdown", 159}, {"execution", 23}};
    std::vector<std::pair<std::string, std::int64_t>> failure_types = {
        {"implementation", 531}, {"validation", 153}, {"post-orchestration", 78},
        {"review", 68},          {"infrastructure", 11}};

    struct Slot {
        Arm arm;
        bool success;
        int tercile;
        std::string task_type;
        double in_tokens = 0, out_tokens = 0;
        MicroUsd fail_cost = 0;
    };
    std::vector<Slot> slots;

    auto take_type = [](std::vector<std::pair<std::string, std::int64_t>>& pool) {
        for (auto& [name, left] : pool)
            if (left > 0) {
                --left;
                return name;
            }
        throw std::runtime_error("task type pool exhausted");
    };

    std::uint64_t sub_seed = seed * 1000003;
    for (const ArmShape& shape : published_arm_shapes()) {
        auto ins = exact_moment_lognormal_sample(std::size_t(shape.successes), shape.mean_in,
                                                 shape.sd_in, sub_seed + 11);
        auto outs = exact_moment_lognormal_sample(std::size_t(shape.successes), shape.mean_out,
                                                  shape.sd_out, sub_seed + 23);
        sub_seed += 101;
        for (std::int64_t k = 0; k < shape.successes; ++k) {
            Slot s;
            s.arm = shape.arm;
            s.success = true;
            s.tercile = terc_success_left[0] > 0 ? 0 : terc_success_left[1] > 0 ? 1 : 2;
            --terc_success_left[s.tercile];
            s.task_type = take_type(success_types);
            s.in_tokens = ins[std::size_t(k)];
            s.out_tokens = outs[std::size_t(k)];
            slots.push_back(std::move(s));
        }
    }
    for (const ArmShape& shape : published_arm_shapes()) {
        std::int64_t failures = shape.assigned - shape.successes;
        for (std::int64_t k = 0; k < failures; ++k) {
            Slot s;
            s.arm = shape.arm;
            s.success = false;
            s.tercile = terc_fail_left[0] > 0 ? 0 : terc_fail_left[1] > 0 ? 1 : 2;
            --terc_fail_left[s.tercile];
            s.task_type = take_type(failure_types);
            s.fail_cost = shape.failure_cost_micro;
            slots.push_back(std::move(s));
        }
    }

    // Execution order: all successes before the first failure (index 359,
    // 1-based), 11.4 simulated seconds apart.
    const double start = double(epoch_from_civil(2026, 1, 15));
    const PricingModel pricing;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const Slot& s = slots[i];
        std::string id = sha256_hex16("summary-fixture-" + std::to_string(i));

        Stimulus stim;
        stim.stimulus_id = id;
        stim.instruction = "fixture stimulus " + std::to_string(i);
        stim.task_type = s.task_type;
        stim.source = i % 3 == 0 ? Source::azure : Source::primary;
        stim.char_length = terc_chars[s.tercile];
        stim.est_tokens = std::int64_t((stim.char_length + 3) / 4);
        stim.tercile = Tercile(s.tercile);
        stim.rework_count = std::int64_t(i % 3);
        fx.corpus.push_back(stim);

        AllocationRow row;
        row.stimulus_id = id;
        row.arm = s.arm;
        row.task_type = s.task_type;
        row.tercile = Tercile(s.tercile);
        row.block_index = int(i) / 6;
        fx.alloc.rows.push_back(row);

        TrialRecord r;
        r.stimulus_id = id;
        r.arm = s.arm;
        CompressionSpec spec = spec_for_arm(s.arm);
        r.strategy = spec.strategy;
        r.target_r = spec.target_retention;
        r.realized_ratio = s.arm == Arm::control ? 1.0 : spec.target_retention;
        r.compressed_digest = sha256_hex16("compressed-" + id);
        double t0 = start + double(i) * 11.4;
        if (s.success) {
            auto in_tok = std::max<std::int64_t>(1, std::llround(s.in_tokens));
            auto out_tok = std::max<std::int64_t>(1, std::llround(s.out_tokens));
            r.input_tokens = in_tok;
            r.output_tokens = out_tok;
            r.cost = trial_cost({in_tok, out_tok}, pricing);
            r.latency_ms = 2000.0 + 15.0 * double(out_tok);
            r.outcome = TrialOutcome::success;
            r.response_text = "response for " + id;
            r.attempt_epochs = {t0};
        } else {
            r.outcome = TrialOutcome::failed_after_retries;
            r.error_kind = ErrorKind::credit_exhausted;
            r.cost.input_cost = s.fail_cost;
            r.cost.output_cost = 0;
            r.cost.total = s.fail_cost;
            r.attempt_epochs = {t0, t0 + 5, t0 + 20, t0 + 80};
        }
        fx.log.push_back(std::move(r));
    }

    std::sort(fx.alloc.rows.begin(), fx.alloc.rows.end(),
              [](const AllocationRow& a, const AllocationRow& b) {
                  return a.stimulus_id < b.stimulus_id;
              });
    fx.alloc.seed = 50;
    fx.alloc.digest = sha256_hex(fx.alloc.to_csv());

    // Similarity scores for the treatment-arm successes.
    std::uint64_t sim_seed = kw_seed * 7919 + 40;
    for (const ArmShape& shape : published_arm_shapes()) {
        if (shape.arm == Arm::control) continue;
        auto sims = exact_moment_sample(std::size_t(shape.successes), shape.mean_sim,
                                        shape.sd_sim, sim_seed);
        sim_seed += 13;
        std::size_t k = 0;
        for (std::size_t i = 0; i < slots.size() && k < sims.size(); ++i) {
            if (!slots[i].success || slots[i].arm != shape.arm) continue;
            ScoreRecord sc;
            sc.stimulus_id = fx.log[i].stimulus_id;
            sc.arm = shape.arm;
            sc.value = sims[k++];
            sc.method = SimMethod::embedding_cosine;
            sc.preserved = sc.value >= 0.85;
            fx.scores.push_back(std::move(sc));
        }
    }
    return fx;
}

} // namespace prct::testsupport
