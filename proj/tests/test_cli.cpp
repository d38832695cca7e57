#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "prct/config.hpp"
#include "prct/errors.hpp"
#include "support/fixtures.hpp"

using namespace prct;
using namespace prct::testsupport;

namespace fs = std::filesystem;

namespace {

const char* kCli = PRCT_CLI_PATH;

std::string fixture_path(const std::string& name) {
    // tests run from the build tree; fixtures live in the source tree
    fs::path p = fs::path(__FILE__).parent_path() / "fixtures" / name;
    return p.string();
}

std::string write_pilot_config(const TempDir& tmp, const std::string& out_dir) {
    nlohmann::ordered_json cfg;
    cfg["corpus"]["files"] = {
        {{"path", fixture_path("pilot_primary.json")}, {"source", "primary"}},
        {{"path", fixture_path("pilot_azure.json")}, {"source", "azure"}}};
    cfg["randomization"] = {{"seed0", 0}, {"max_attempts", 100}};
    cfg["inference"]["backend"] = "simulated";
    cfg["inference"]["simulated"] = {
        {"base_output_tokens", 916},
        {"expansion_curve", nlohmann::json::array({nlohmann::json::array({0.2, 1.032751}),
                                                   nlohmann::json::array({0.5, 0.724891}),
                                                   nlohmann::json::array({0.8, 0.860262}),
                                                   nlohmann::json::array({1.0, 1.0})})},
        {"noise_sigma", 0.15},
        {"noise_seed", 7},
        {"latency_base_ms", 2000},
        {"latency_per_output_token_ms", 12}};
    cfg["similarity"] = {{"threshold", 0.85}, {"provider", "none"}};
    cfg["analysis"] = {{"population", "complete_case"},
                       {"bootstrap_B", 2000},
                       {"n_perm", 2000},
                       {"seed", 20260115}};
    cfg["output_dir"] = out_dir;
    std::string path = tmp.file("config.json");
    std::ofstream out(path);
    out << cfg.dump(2);
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

std::string run_cli(const std::string& args, int expected_exit) {
    auto result = exec_command(std::string(kCli) + " " + args);
    CAPTURE(args);
    CAPTURE(result.output);
    CHECK(result.exit_code == expected_exit);
    return result.output;
}

} // namespace

TEST_CASE("config parsing: defaults, overrides, unknown keys") {
    RunConfig defaults = parse_config("{}", "inline");
    CHECK(defaults.backend == "simulated");
    CHECK(defaults.inference.rpm_limit == 60.0);
    CHECK(defaults.inference.retry_backoff_seconds == std::vector<double>{5.0, 15.0, 60.0});
    CHECK(defaults.inference.pricing.input_usd_per_mtok == 3.0);
    CHECK(defaults.inference.pricing.output_usd_per_mtok == 15.0);
    CHECK(defaults.similarity.threshold == 0.85);
    CHECK(defaults.analysis.bootstrap_B == 10000);
    CHECK(defaults.inclusion.min_length == 20);
    CHECK(defaults.inclusion.excluded_prefixes.size() == 11);

    RunConfig custom = parse_config(
        R"({"inference": {"rpm_limit": 30, "pricing": {"input_usd_per_mtok": 1.0,
            "output_usd_per_mtok": 4.0}}, "output_dir": "elsewhere"})",
        "inline");
    CHECK(custom.inference.rpm_limit == 30.0);
    CHECK(custom.inference.pricing.price_ratio() == doctest::Approx(4.0));
    CHECK(custom.output_dir == "elsewhere");

    // unknown keys are rejected with the field path
    try {
        parse_config(R"({"inference": {"rpm": 30}})", "inline");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("inference.rpm") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(R"({"unknown_top": 1})", "inline"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"analysis": {"population": "sideways"}})", "inline"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"inference": {"backend": "carrier-pigeon"}})", "inline"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("not json", "inline"), ConfigError);
}

TEST_CASE("cli: full pilot pipeline end to end") {
    TempDir tmp("cli_e2e");
    std::string out_dir = tmp.file("out");
    std::string config = write_pilot_config(tmp, out_dir);

    run_cli("prepare --config " + config, 0);
    CHECK(fs::exists(out_dir + "/corpus.jsonl"));
    CHECK(fs::exists(out_dir + "/corpus.jsonl.sha256"));
    CHECK(fs::exists(out_dir + "/exclusion_tally.json"));

    auto tally = nlohmann::json::parse(slurp(out_dir + "/exclusion_tally.json"));
    CHECK(tally["retained"] == 30);
    CHECK(tally["too_short"] == 2);
    CHECK(tally["bad_status"] == 1);
    CHECK(tally["test_fixture"] == 1);
    CHECK(tally["duplicates"] == 2);
    CHECK(tally["input_records"] == 36);

    std::string randomize_out = run_cli("randomize --config " + config, 0);
    CHECK(fs::exists(out_dir + "/allocation.csv"));
    CHECK(randomize_out.find("accepted allocation at seed 0") != std::string::npos);

    run_cli("validate-balance --config " + config, 0);

    std::string run_out = run_cli("run --config " + config, 0);
    CHECK(run_out.find("succeeded 30") != std::string::npos);
    run_cli("run --baseline --config " + config, 0);
    CHECK(fs::exists(out_dir + "/trials.jsonl"));
    CHECK(fs::exists(out_dir + "/baseline.jsonl"));

    std::string score_out = run_cli("score-similarity --config " + config, 0);
    CHECK(score_out.find("scored 25 pairs") != std::string::npos); // 30 minus control arm
    CHECK(fs::exists(out_dir + "/scores.jsonl"));
    CHECK(fs::exists(out_dir + "/pairs.jsonl"));

    run_cli("analyze --config " + config, 0);
    auto results = nlohmann::json::parse(slurp(out_dir + "/results.json"));
    CHECK(results["population"] == "complete_case");

    // the qualitative headline: aggressive mean cost exceeds moderate's
    double aggressive = 0, moderate = 0;
    for (const auto& s : results["arm_summaries"]) {
        if (s["arm"] == "aggressive") aggressive = s["mean_cost_usd"].get<double>();
        if (s["arm"] == "moderate") moderate = s["mean_cost_usd"].get<double>();
    }
    CHECK(aggressive > moderate);

    run_cli("report --config " + config, 0);
    CHECK(fs::exists(out_dir + "/tables/arm_summary.csv"));
    CHECK(fs::exists(out_dir + "/figure_data.csv"));
    run_cli("report --format latex --config " + config, 0);
    CHECK(fs::exists(out_dir + "/tables/arm_summary.tex"));

    run_cli("consort --config " + config, 0);
    auto consort = nlohmann::json::parse(slurp(out_dir + "/consort.json"));
    CHECK(consort["enrollment"]["assessed"] == 36);
    CHECK(consort["enrollment"]["randomized"] == 30);
    CHECK(consort["closure"]["enrollment_consistent"].get<bool>());

    run_cli("sensitivity --config " + config, 0);
    CHECK(fs::exists(out_dir + "/sensitivity.json"));

    // restartability: re-running steps reproduces identical artifacts
    std::string corpus_before = slurp(out_dir + "/corpus.jsonl");
    std::string alloc_before = slurp(out_dir + "/allocation.csv");
    std::string results_before = slurp(out_dir + "/results.json");
    run_cli("prepare --config " + config, 0);
    run_cli("randomize --config " + config, 0);
    run_cli("analyze --config " + config, 0);
    CHECK(slurp(out_dir + "/corpus.jsonl") == corpus_before);
    CHECK(slurp(out_dir + "/allocation.csv") == alloc_before);
    CHECK(slurp(out_dir + "/results.json") == results_before);
}

TEST_CASE("cli: exit codes") {
    TempDir tmp("cli_codes");
    std::string out_dir = tmp.file("out");
    std::string config = write_pilot_config(tmp, out_dir);

    // missing upstream artifact -> 2 with the expected path
    std::string out = run_cli("randomize --config " + config, 2);
    CHECK(out.find("corpus.jsonl") != std::string::npos);
    run_cli("run --config " + config, 2);
    run_cli("analyze --config " + config, 2);
    run_cli("report --config " + config, 2);

    // config validation failure -> 2 naming the field
    std::string bad_config = tmp.file("bad.json");
    {
        std::ofstream bad(bad_config);
        bad << R"({"inference": {"rpm": 12}})";
    }
    std::string msg = run_cli("prepare --config " + bad_config, 2);
    CHECK(msg.find("inference.rpm") != std::string::npos);

    // missing config file -> 2
    run_cli("prepare --config " + tmp.file("nope.json"), 2);

    // validate-balance exits 1 on a failing gate: swap in a corpus with
    // wildly uneven lengths and an allocation that sorts them into arms
    run_cli("prepare --config " + config, 0);
    std::vector<Stimulus> uneven;
    for (int i = 0; i < 30; ++i) {
        Stimulus s;
        s.stimulus_id = "id" + std::string(1, char('a' + i % 26)) + std::to_string(i);
        s.instruction = std::string(std::size_t(40 + i * 60), 'z');
        s.task_type = "implementation";
        s.char_length = 40 + std::size_t(i) * 60;
        s.est_tokens = std::int64_t((s.char_length + 3) / 4);
        s.tercile = i < 10 ? Tercile::short_bin : i < 20 ? Tercile::medium_bin : Tercile::long_bin;
        s.rework_count = 0;
        uneven.push_back(s);
    }
    write_corpus_jsonl(uneven, out_dir + "/corpus.jsonl");
    AllocationTable uneven_alloc;
    uneven_alloc.seed = 0;
    for (int i = 0; i < 30; ++i) {
        AllocationRow row;
        row.stimulus_id = uneven[std::size_t(i)].stimulus_id;
        row.arm = all_arms()[std::size_t(i) / 5]; // longest five all in one arm
        row.task_type = "implementation";
        row.tercile = uneven[std::size_t(i)].tercile;
        row.block_index = i / 6;
        uneven_alloc.rows.push_back(row);
    }
    std::sort(uneven_alloc.rows.begin(), uneven_alloc.rows.end(),
              [](const AllocationRow& a, const AllocationRow& b) {
                  return a.stimulus_id < b.stimulus_id;
              });
    write_allocation_csv(uneven_alloc, out_dir + "/allocation.csv");
    std::string gate = run_cli("validate-balance --config " + config, 1);
    CHECK(gate.find("FAIL") != std::string::npos);
}

TEST_CASE("cli: seed override, population switch, prepared-pairs scoring") {
    TempDir tmp("cli_flags");
    std::string out_dir = tmp.file("out");
    std::string config = write_pilot_config(tmp, out_dir);

    run_cli("prepare --config " + config, 0);
    std::string seeded = run_cli("randomize --seed 5 --config " + config, 0);
    CHECK(seeded.find("accepted allocation at seed 5") != std::string::npos);

    run_cli("run --config " + config, 0);
    run_cli("run --baseline --config " + config, 0);
    run_cli("score-similarity --config " + config, 0);

    // analyze --population all labels the document accordingly
    run_cli("analyze --population all --config " + config, 0);
    auto results = nlohmann::json::parse(slurp(out_dir + "/results.json"));
    CHECK(results["population"] == "all_submitted");

    // scoring a prepared pairs artifact
    std::string pairs = tmp.file("pairs.jsonl");
    {
        std::ofstream out(pairs);
        out << R"({"stimulus_id":"p1","arm":"light","treatment_response":"a b c","control_response":"b c d"})"
            << "\n";
    }
    std::string scored = run_cli("score-similarity --pairs " + pairs + " --config " + config, 0);
    CHECK(scored.find("scored 1 pairs") != std::string::npos);
    auto score_lines = read_score_jsonl(out_dir + "/scores.jsonl");
    REQUIRE(score_lines.size() == 1);
    CHECK(score_lines[0].value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(score_lines[0].method == SimMethod::jaccard);
}

TEST_CASE("cli: randomize exhaustion exits 1") {
    TempDir tmp("cli_exhaust");
    std::string out_dir = tmp.file("out");

    // a corpus whose covariate spread cannot pass the SMD gate: a
    // complete-block stratum of equal lengths keeps arms populated while a
    // geometric stratum keeps the SMDs enormous
    nlohmann::json records = nlohmann::json::array();
    for (int i = 0; i < 24; ++i) {
        std::size_t len = i < 12 ? 100 : std::size_t(1000) << (i - 12);
        nlohmann::json r;
        r["task_id"] = "task-hard-" + std::to_string(i);
        r["status"] = "completed";
        r["task_type"] = "implementation";
        r["instruction"] = std::string(len, char('a' + i));
        r["rework_count"] = 0;
        records.push_back(r);
    }
    std::string raw = tmp.file("hard.json");
    {
        std::ofstream out(raw);
        out << records.dump();
    }
    nlohmann::ordered_json cfg;
    cfg["corpus"]["files"] = {{{"path", raw}, {"source", "primary"}}};
    cfg["randomization"] = {{"seed0", 0}, {"max_attempts", 3}};
    cfg["output_dir"] = out_dir;
    std::string config = tmp.file("config.json");
    {
        std::ofstream out(config);
        out << cfg.dump();
    }
    run_cli("prepare --config " + config, 0);
    std::string msg = run_cli("randomize --config " + config, 1);
    CHECK(msg.find("no balanced allocation") != std::string::npos);
}

TEST_CASE("cli: breakeven subcommand") {
    std::string out = run_cli("breakeven --I 107 --O 916 --k 5 --grid 0.2,0.5", 0);
    CHECK(out.find("r,e_max,margin") != std::string::npos);
    CHECK(out.find("0.200000,1.018690,") != std::string::npos);
    CHECK(out.find("0.500000,1.011681,") != std::string::npos);

    std::string with_margin = run_cli("breakeven --I 107 --O 916 --k 5 --grid 0.5 --e 1.0328", 0);
    CHECK(with_margin.find("-0.021119") != std::string::npos);

    run_cli("breakeven --I 107 --O 916 --k 5 --grid ,", 2);
}
