// prct: prompt-compression cost experiment toolkit.
//
// One binary, ten subcommands covering the pipeline end to end: corpus
// preparation, stratified randomization with a balance gate, trial
// execution against a simulated or HTTP model backend, similarity scoring,
// the pre-registered analyses, report tables, and break-even arithmetic.
//
// Exit codes: 0 success (or gate pass), 1 gate fail, 2 usage/config/IO.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "prct/analysis.hpp"
#include "prct/config.hpp"
#include "prct/corpus.hpp"
#include "prct/errors.hpp"
#include "prct/harness/harness.hpp"
#include "prct/report.hpp"
#include "prct/sha256.hpp"
#include "prct/similarity.hpp"

namespace {

using namespace prct;

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::string out_dir_override;
};

RunConfig load(const CommonArgs& args) {
    RunConfig cfg = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
    if (!args.out_dir_override.empty()) cfg.output_dir = args.out_dir_override;
    return cfg;
}

std::string artifact(const RunConfig& cfg, const std::string& name) {
    return cfg.output_dir + "/" + name;
}

void require_artifact(const std::string& path, const std::string& producer) {
    if (!fs::exists(path))
        throw IngestError("missing upstream artifact: " + path + " (run `prct " + producer +
                          "` first)");
}

void write_json(const nlohmann::ordered_json& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << doc.dump(2) << "\n";
}

std::unique_ptr<Clock> make_clock(const RunConfig& cfg) {
    if (cfg.backend == "simulated") return std::make_unique<SimClock>();
    return std::make_unique<SystemClock>();
}

std::unique_ptr<ModelBackend> make_backend(const RunConfig& cfg, Clock& clock) {
    if (cfg.backend == "simulated")
        return std::make_unique<SimulatedBackend>(cfg.simulated, &clock);
    if (cfg.http.base_url.empty())
        throw ConfigError("inference.http.base_url required for the http backend",
                          "inference.http.base_url");
    return std::make_unique<HttpBackend>(cfg.http);
}

ExclusionTally read_tally(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read tally file: " + path);
    nlohmann::json j;
    in >> j;
    ExclusionTally t;
    t.too_short = j.at("too_short").get<std::int64_t>();
    t.bad_status = j.at("bad_status").get<std::int64_t>();
    t.test_fixture = j.at("test_fixture").get<std::int64_t>();
    t.duplicates = j.at("duplicates").get<std::int64_t>();
    t.retained = j.at("retained").get<std::int64_t>();
    return t;
}

int cmd_prepare(const CommonArgs& args) {
    RunConfig cfg = load(args);
    if (cfg.corpus_files.empty())
        throw ConfigError("prepare needs corpus.files in the config", "corpus.files");
    fs::create_directories(cfg.output_dir);

    std::vector<std::pair<std::string, Source>> paths;
    for (const CorpusFileEntry& f : cfg.corpus_files) paths.emplace_back(f.path, f.source);
    LoadResult loaded = load_records(paths);
    for (const RecordSkip& skip : loaded.skips)
        std::cerr << "skip " << skip.path << "[" << skip.index << "]: " << skip.reason << "\n";

    auto [included, tally] = apply_inclusion(loaded.records, cfg.inclusion);
    auto [unique_records, dup_count] = deduplicate(included);
    tally.duplicates = dup_count;
    tally.retained = std::int64_t(unique_records.size());
    std::vector<Stimulus> corpus = finalize_corpus(unique_records);

    std::string corpus_path = artifact(cfg, "corpus.jsonl");
    write_corpus_jsonl(corpus, corpus_path);
    std::string digest = corpus_digest(corpus_to_jsonl(corpus));
    write_digest_file(digest, corpus_path, corpus_path + ".sha256");

    nlohmann::ordered_json tally_json;
    tally_json["input_records"] = tally.total();
    tally_json["too_short"] = tally.too_short;
    tally_json["bad_status"] = tally.bad_status;
    tally_json["test_fixture"] = tally.test_fixture;
    tally_json["duplicates"] = tally.duplicates;
    tally_json["retained"] = tally.retained;
    tally_json["skipped_records"] = loaded.skips.size();
    write_json(tally_json, artifact(cfg, "exclusion_tally.json"));

    std::cout << "prepared corpus: " << corpus.size() << " stimuli (from " << tally.total()
              << " records; excluded " << tally.too_short << " short, " << tally.bad_status
              << " status, " << tally.test_fixture << " fixtures, " << tally.duplicates
              << " duplicates)\n"
              << "corpus digest: " << digest << "\n";
    return 0;
}

int cmd_randomize(const CommonArgs& args, std::optional<std::uint64_t> seed_override) {
    RunConfig cfg = load(args);
    std::string corpus_path = artifact(cfg, "corpus.jsonl");
    require_artifact(corpus_path, "prepare");
    std::vector<Stimulus> corpus = read_corpus_jsonl(corpus_path);

    std::uint64_t seed0 = seed_override.value_or(cfg.randomization.seed0);
    RerandomizeResult result = rerandomize_until_balanced(
        corpus, seed0, cfg.randomization.max_attempts, cfg.randomization.alpha,
        cfg.randomization.smd_cap);

    std::string alloc_path = artifact(cfg, "allocation.csv");
    write_allocation_csv(result.table, alloc_path);
    write_digest_file(result.table.digest, alloc_path, alloc_path + ".sha256");
    write_json(balance_report_to_json(result.report), artifact(cfg, "balance_report.json"));

    std::cout << "accepted allocation at seed " << result.table.seed << " (attempt "
              << result.attempts_used << ")\n"
              << "allocation digest: " << result.table.digest << "\n";
    return 0;
}

int cmd_validate_balance(const CommonArgs& args) {
    RunConfig cfg = load(args);
    std::string corpus_path = artifact(cfg, "corpus.jsonl");
    std::string alloc_path = artifact(cfg, "allocation.csv");
    require_artifact(corpus_path, "prepare");
    require_artifact(alloc_path, "randomize");
    std::vector<Stimulus> corpus = read_corpus_jsonl(corpus_path);
    AllocationTable alloc = read_allocation_csv(alloc_path);
    BalanceReport report = validate_balance(corpus, alloc, cfg.randomization.alpha,
                                            cfg.randomization.smd_cap);
    write_json(balance_report_to_json(report), artifact(cfg, "balance_report.json"));
    if (report.passed) {
        std::cout << "balance: PASS (max |SMD| = " << report.max_pairwise_smd << ")\n";
        return 0;
    }
    std::cout << "balance: FAIL:";
    for (const std::string& check : report.failing_checks) std::cout << " " << check;
    std::cout << "\n";
    return 1;
}

int cmd_run(const CommonArgs& args, const std::string& backend_override, bool retry_failures,
            bool baseline) {
    RunConfig cfg = load(args);
    if (!backend_override.empty()) cfg.backend = backend_override;
    std::string corpus_path = artifact(cfg, "corpus.jsonl");
    std::string alloc_path = artifact(cfg, "allocation.csv");
    require_artifact(corpus_path, "prepare");
    require_artifact(alloc_path, "randomize");
    std::vector<Stimulus> corpus = read_corpus_jsonl(corpus_path);
    AllocationTable alloc = read_allocation_csv(alloc_path);

    std::unique_ptr<Clock> clock = make_clock(cfg);
    std::unique_ptr<ModelBackend> backend = make_backend(cfg, *clock);

    RunOptions opts;
    opts.retry_failures = retry_failures;
    opts.baseline_mode = baseline;
    std::string log_path = artifact(cfg, baseline ? "baseline.jsonl" : "trials.jsonl");
    RunSummary summary =
        run_trials(alloc, corpus, *backend, cfg.inference, log_path, *clock, opts);

    nlohmann::ordered_json sj;
    sj["log"] = log_path;
    sj["submitted"] = summary.submitted;
    sj["succeeded"] = summary.succeeded;
    sj["failed"] = summary.failed;
    write_json(sj, artifact(cfg, baseline ? "baseline_summary.json" : "run_summary.json"));
    std::cout << (baseline ? "baseline" : "run") << ": submitted " << summary.submitted
              << ", succeeded " << summary.succeeded << ", failed " << summary.failed << "\n";
    return 0;
}

int cmd_score_similarity(const CommonArgs& args, const std::string& pairs_path) {
    RunConfig cfg = load(args);
    std::vector<ResponsePair> pairs;
    if (!pairs_path.empty()) {
        require_artifact(pairs_path, "run");
        std::ifstream in(pairs_path, std::ios::binary);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw IngestError("pairs file line " + std::to_string(line_no) + ": " + e.what());
            }
            ResponsePair p;
            p.stimulus_id = j.at("stimulus_id").get<std::string>();
            p.arm = arm_from_name(j.at("arm").get<std::string>());
            p.treatment_response = j.at("treatment_response").get<std::string>();
            p.control_response = j.at("control_response").get<std::string>();
            pairs.push_back(std::move(p));
        }
    } else {
        std::string trials_path = artifact(cfg, "trials.jsonl");
        std::string baseline_path = artifact(cfg, "baseline.jsonl");
        require_artifact(trials_path, "run");
        require_artifact(baseline_path, "run --baseline");
        std::vector<TrialRecord> treatment = dedupe_latest(read_trial_log(trials_path));
        std::vector<TrialRecord> baseline = dedupe_latest(read_trial_log(baseline_path));
        std::vector<std::string> unmatched;
        pairs = build_pairs(treatment, baseline, &unmatched);
        for (const std::string& id : unmatched)
            std::cerr << "unmatched treatment stimulus: " << id << "\n";
        std::ofstream pf(artifact(cfg, "pairs.jsonl"), std::ios::binary | std::ios::trunc);
        for (const ResponsePair& p : pairs) {
            nlohmann::ordered_json j;
            j["stimulus_id"] = p.stimulus_id;
            j["arm"] = arm_name(p.arm);
            j["treatment_response"] = p.treatment_response;
            j["control_response"] = p.control_response;
            pf << j.dump() << "\n";
        }
    }

    std::unique_ptr<EmbeddingProvider> http_provider;
    std::unique_ptr<CachingProvider> cached;
    EmbeddingProvider* provider = nullptr;
    if (cfg.similarity.provider == "http") {
        if (cfg.similarity.http.base_url.empty())
            throw ConfigError("similarity.http.base_url required for the http provider",
                              "similarity.http.base_url");
        http_provider = std::make_unique<HttpEmbeddingProvider>(cfg.similarity.http);
        if (!cfg.similarity.cache_dir.empty()) {
            cached = std::make_unique<CachingProvider>(*http_provider, cfg.similarity.cache_dir);
            provider = cached.get();
        } else {
            provider = http_provider.get();
        }
    }

    std::vector<ScoreRecord> scores;
    std::size_t fallbacks = 0;
    for (const ResponsePair& p : pairs) {
        std::string cause;
        SimilarityScore s = score_pair(p, provider, cfg.similarity.threshold, &cause);
        if (provider && s.method == SimMethod::jaccard) {
            ++fallbacks;
            std::cerr << "fallback to jaccard for " << p.stimulus_id << ": " << cause << "\n";
        }
        scores.push_back({p.stimulus_id, p.arm, s.value, s.method, s.preserved});
    }
    write_score_jsonl(scores, artifact(cfg, "scores.jsonl"));
    std::cout << "scored " << scores.size() << " pairs";
    if (provider) std::cout << " (" << fallbacks << " fallbacks)";
    std::cout << "\n";
    return 0;
}

int cmd_analyze(const CommonArgs& args, const std::string& population_override) {
    RunConfig cfg = load(args);
    if (!population_override.empty()) {
        std::string p = population_override == "complete-case" ? "complete_case"
                        : population_override == "all"         ? "all_submitted"
                                                                : population_override;
        cfg.analysis.population = p;
    }
    std::string corpus_path = artifact(cfg, "corpus.jsonl");
    std::string alloc_path = artifact(cfg, "allocation.csv");
    std::string trials_path = artifact(cfg, "trials.jsonl");
    std::string tally_path = artifact(cfg, "exclusion_tally.json");
    require_artifact(corpus_path, "prepare");
    require_artifact(alloc_path, "randomize");
    require_artifact(trials_path, "run");
    require_artifact(tally_path, "prepare");

    std::vector<Stimulus> corpus = read_corpus_jsonl(corpus_path);
    AllocationTable alloc = read_allocation_csv(alloc_path);
    std::vector<TrialRecord> log = read_trial_log(trials_path);
    ExclusionTally tally = read_tally(tally_path);
    std::vector<ScoreRecord> scores;
    std::string scores_path = artifact(cfg, "scores.jsonl");
    if (fs::exists(scores_path)) scores = read_score_jsonl(scores_path);

    nlohmann::ordered_json results =
        build_results_document(log, scores, alloc, tally, corpus, cfg.analysis);
    write_json(results, artifact(cfg, "results.json"));
    std::cout << "analysis complete: " << artifact(cfg, "results.json") << "\n";
    return 0;
}

int cmd_report(const CommonArgs& args, const std::string& format_name) {
    RunConfig cfg = load(args);
    std::string results_path = artifact(cfg, "results.json");
    require_artifact(results_path, "analyze");
    std::ifstream in(results_path, std::ios::binary);
    nlohmann::ordered_json results = nlohmann::ordered_json::parse(in);

    TableFormat format = table_format_from_name(format_name);
    std::string tables_dir = artifact(cfg, "tables");
    std::vector<std::string> written = render_tables(results, format, tables_dir);

    std::string trials_path = artifact(cfg, "trials.jsonl");
    if (fs::exists(trials_path)) {
        std::vector<TrialRecord> log = read_trial_log(trials_path);
        std::vector<ScoreRecord> scores;
        std::string scores_path = artifact(cfg, "scores.jsonl");
        if (fs::exists(scores_path)) scores = read_score_jsonl(scores_path);
        std::string fig_path = artifact(cfg, "figure_data.csv");
        std::ofstream fig(fig_path, std::ios::binary | std::ios::trunc);
        fig << figure_data_csv(log, scores);
        written.push_back(fig_path);
    }
    for (const std::string& path : written) std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_breakeven(double input_tokens, double output_tokens, double k,
                  const std::string& grid_arg, std::optional<double> observed_e,
                  const std::string& out_path) {
    std::vector<double> grid;
    std::stringstream ss(grid_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        grid.push_back(std::stod(item));
    }
    if (grid.empty()) throw ConfigError("breakeven needs a non-empty --grid", "grid");
    std::vector<BreakEvenResult> rows =
        breakeven_surface(input_tokens, output_tokens, k, grid, observed_e);
    std::string csv = breakeven_csv(rows);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + out_path);
        out << csv;
    }
    std::cout << csv;
    return 0;
}

int cmd_consort(const CommonArgs& args) {
    RunConfig cfg = load(args);
    std::string tally_path = artifact(cfg, "exclusion_tally.json");
    std::string alloc_path = artifact(cfg, "allocation.csv");
    std::string trials_path = artifact(cfg, "trials.jsonl");
    require_artifact(tally_path, "prepare");
    require_artifact(alloc_path, "randomize");
    require_artifact(trials_path, "run");
    nlohmann::ordered_json doc = consort_counts(
        read_tally(tally_path), read_allocation_csv(alloc_path), read_trial_log(trials_path));
    write_json(doc, artifact(cfg, "consort.json"));
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int cmd_sensitivity(const CommonArgs& args) {
    RunConfig cfg = load(args);
    std::string alloc_path = artifact(cfg, "allocation.csv");
    std::string trials_path = artifact(cfg, "trials.jsonl");
    require_artifact(alloc_path, "randomize");
    require_artifact(trials_path, "run");
    nlohmann::ordered_json doc = sensitivity_to_json(
        assignment_sensitivity(read_allocation_csv(alloc_path), read_trial_log(trials_path)));
    write_json(doc, artifact(cfg, "sensitivity.json"));
    std::cout << doc.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"prompt-compression cost experiment toolkit"};
    app.require_subcommand(1);

    CommonArgs common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "JSON configuration file");
        sub->add_option("--out-dir", common.out_dir_override,
                        "artifact directory (overrides config output_dir)");
    };

    auto* prepare = app.add_subcommand("prepare", "load, filter, dedupe and feature the corpus");
    add_common(prepare);

    auto* randomize = app.add_subcommand("randomize", "stratified permuted-block randomization");
    add_common(randomize);
    std::uint64_t seed_flag = 0;
    bool seed_set = false;
    randomize->add_option("--seed", seed_flag, "starting seed (overrides config seed0)")
        ->each([&](const std::string&) { seed_set = true; });

    auto* validate = app.add_subcommand("validate-balance", "run the four balance checks");
    add_common(validate);

    auto* run = app.add_subcommand("run", "execute trials against the model backend");
    add_common(run);
    std::string backend_override;
    bool retry_failures = false, baseline = false;
    run->add_option("--backend", backend_override, "simulated or http")
        ->check(CLI::IsMember({"simulated", "http"}));
    run->add_flag("--retry-failures", retry_failures, "re-queue failed trials on resume");
    run->add_flag("--baseline", baseline,
                  "run every allocated stimulus uncompressed into baseline.jsonl");

    auto* score = app.add_subcommand("score-similarity", "score responses against baselines");
    add_common(score);
    std::string pairs_path;
    score->add_option("--pairs", pairs_path, "score a prepared pairs JSONL instead of the logs");

    auto* analyze = app.add_subcommand("analyze", "run the pre-registered analyses");
    add_common(analyze);
    std::string population;
    analyze->add_option("--population", population, "complete-case or all")
        ->check(CLI::IsMember({"complete-case", "all", "complete_case", "all_submitted"}));

    auto* report = app.add_subcommand("report", "render report tables and figure data");
    add_common(report);
    std::string format = "csv";
    report->add_option("--format", format, "csv or latex")
        ->check(CLI::IsMember({"csv", "latex"}));

    auto* breakeven = app.add_subcommand("breakeven", "break-even expansion surface");
    double be_input = 107, be_output = 916, be_k = 5.0;
    std::string grid = "0.2,0.5,0.8,1.0";
    double observed_e = 0.0;
    bool observed_set = false;
    std::string be_out;
    breakeven->add_option("--I", be_input, "original input tokens");
    breakeven->add_option("--O", be_output, "baseline output tokens");
    breakeven->add_option("--k", be_k, "output/input price ratio");
    breakeven->add_option("--grid", grid, "comma-separated retention ratios");
    breakeven->add_option("--e", observed_e, "observed expansion ratio (adds margin column)")
        ->each([&](const std::string&) { observed_set = true; });
    breakeven->add_option("--out", be_out, "also write the CSV here");

    auto* consort = app.add_subcommand("consort", "CONSORT flow accounting");
    add_common(consort);

    auto* sensitivity = app.add_subcommand("sensitivity", "assignment-level sensitivity table");
    add_common(sensitivity);

    CLI11_PARSE(app, argc, argv);

    try {
        if (prepare->parsed()) return cmd_prepare(common);
        if (randomize->parsed())
            return cmd_randomize(common, seed_set ? std::optional<std::uint64_t>(seed_flag)
                                                  : std::nullopt);
        if (validate->parsed()) return cmd_validate_balance(common);
        if (run->parsed()) return cmd_run(common, backend_override, retry_failures, baseline);
        if (score->parsed()) return cmd_score_similarity(common, pairs_path);
        if (analyze->parsed()) return cmd_analyze(common, population);
        if (report->parsed()) return cmd_report(common, format);
        if (breakeven->parsed())
            return cmd_breakeven(be_input, be_output, be_k, grid,
                                 observed_set ? std::optional<double>(observed_e) : std::nullopt,
                                 be_out);
        if (consort->parsed()) return cmd_consort(common);
        if (sensitivity->parsed()) return cmd_sensitivity(common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NoBalancedAllocationError& e) {
        std::cerr << "balance gate: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
