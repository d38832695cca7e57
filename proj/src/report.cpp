#include "prct/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "prct/analysis.hpp"
#include "prct/errors.hpp"

namespace prct {

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write table file: " + path);
    out << content;
}

struct Column {
    std::string header;
    std::string latex_header;
    char align = 'l';
};

std::string csv_table(const std::vector<Column>& cols,
                      const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ',';
        out += cols[i].header;
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

std::string latex_table(const std::vector<Column>& cols,
                        const std::vector<std::vector<std::string>>& rows) {
    std::string out = "\\begin{tabular}{";
    for (const Column& c : cols) out += c.align;
    out += "}\n\\toprule\n";
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += " & ";
        out += cols[i].latex_header.empty() ? cols[i].header : cols[i].latex_header;
    }
    out += " \\\\\n\\midrule\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += " & ";
            out += row[i];
        }
        out += " \\\\\n";
    }
    out += "\\bottomrule\n\\end{tabular}\n";
    return out;
}

std::string render(const std::vector<Column>& cols,
                   const std::vector<std::vector<std::string>>& rows, TableFormat format) {
    return format == TableFormat::csv ? csv_table(cols, rows) : latex_table(cols, rows);
}

std::string maybe(const nlohmann::ordered_json& j, const char* key, const char* format) {
    if (!j.contains(key)) return "";
    return fmt(format, j[key].get<double>());
}

} // namespace

TableFormat table_format_from_name(const std::string& name) {
    if (name == "csv") return TableFormat::csv;
    if (name == "latex") return TableFormat::latex;
    throw ConfigError("unknown table format: " + name + " (use csv or latex)", "format");
}

std::vector<std::string> render_tables(const nlohmann::ordered_json& results, TableFormat format,
                                       const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string ext = format == TableFormat::csv ? ".csv" : ".tex";
    std::vector<std::string> written;

    // Stars from the net-savings tests, keyed by arm.
    std::map<std::string, std::string> stars;
    if (results.contains("h5_threshold") && results["h5_threshold"].contains("net_savings_tests"))
        for (const auto& e : results["h5_threshold"]["net_savings_tests"])
            stars[e["arm"].get<std::string>()] = e["stars"].get<std::string>();

    {
        std::vector<Column> cols = {{"arm", "", 'l'},
                                    {"n", "$n$", 'r'},
                                    {"mean_in_tokens", "Mean In", 'r'},
                                    {"mean_out_tokens", "Mean Out", 'r'},
                                    {"mean_cost_usd", "Mean Cost (\\$)", 'r'},
                                    {"savings_pct", "Savings", 'r'}};
        std::vector<std::vector<std::string>> rows;
        for (const auto& s : results["arm_summaries"]) {
            std::string arm = s["arm"].get<std::string>();
            std::string savings_cell;
            if (s.contains("savings_pct")) {
                // Printed with the sign convention of the source tables:
                // negative deltas are reductions.
                savings_cell = fmt("%.1f%%", -s["savings_pct"].get<double>());
                if (format == TableFormat::latex) {
                    savings_cell = fmt("$%.1f\\%%$", -s["savings_pct"].get<double>());
                    auto it = stars.find(arm);
                    if (it != stars.end() && !it->second.empty())
                        savings_cell += "$^{" + it->second + "}$";
                } else {
                    auto it = stars.find(arm);
                    if (it != stars.end() && !it->second.empty())
                        savings_cell += it->second;
                }
            }
            rows.push_back({arm, std::to_string(s["n"].get<std::int64_t>()),
                            fmt("%.1f", s["mean_in_tokens"].get<double>()),
                            fmt("%.1f", s["mean_out_tokens"].get<double>()),
                            fmt("%.6f", s["mean_cost_usd"].get<double>()), savings_cell});
        }
        std::string path = out_dir + "/arm_summary" + ext;
        write_file(path, render(cols, rows, format));
        written.push_back(path);
    }

    {
        std::vector<Column> cols = {{"arm", "", 'l'},
                                    {"n", "$n$", 'r'},
                                    {"mean_similarity", "Mean Similarity", 'r'},
                                    {"pct_preserved", "\\% Preserved", 'r'}};
        std::vector<std::vector<std::string>> rows;
        for (const auto& s : results["arm_summaries"]) {
            if (s["arm"] == "control" || !s.contains("mean_similarity")) continue;
            rows.push_back({s["arm"].get<std::string>(),
                            std::to_string(s["n"].get<std::int64_t>()),
                            fmt("%.3f", s["mean_similarity"].get<double>()),
                            maybe(s, "pct_preserved", "%.1f")});
        }
        std::string path = out_dir + "/similarity_by_arm" + ext;
        write_file(path, render(cols, rows, format));
        written.push_back(path);
    }

    {
        std::vector<Column> cols = {{"arm", "", 'l'},
                                    {"mean_cost_usd", "Mean Cost", 'r'},
                                    {"mean_similarity", "Similarity", 'r'},
                                    {"pareto", "Pareto?", 'l'}};
        std::vector<std::vector<std::string>> rows;
        if (results.contains("h4_pareto") && results["h4_pareto"].contains("points"))
            for (const auto& p : results["h4_pareto"]["points"])
                rows.push_back({p["arm"].get<std::string>(),
                                fmt("%.6f", p["mean_cost_usd"].get<double>()),
                                fmt("%.3f", p["mean_similarity"].get<double>()),
                                p["dominated"].get<bool>() ? "no" : "yes"});
        std::string path = out_dir + "/pareto" + ext;
        write_file(path, render(cols, rows, format));
        written.push_back(path);
    }

    {
        std::vector<Column> cols = {{"arm", "", 'l'},
                                    {"assigned", "Assigned", 'r'},
                                    {"successful", "Successful", 'r'},
                                    {"mean_cost_usd", "Mean Cost (\\$)", 'r'},
                                    {"successes_per_dollar", "Successes/\\$", 'r'},
                                    {"cost_reduction_pct", "Cost Reduction", 'r'}};
        std::vector<std::vector<std::string>> rows;
        if (results.contains("assignment_sensitivity"))
            for (const auto& r : results["assignment_sensitivity"])
                rows.push_back({r["arm"].get<std::string>(),
                                std::to_string(r["assigned"].get<std::int64_t>()),
                                std::to_string(r["successful"].get<std::int64_t>()),
                                fmt("%.6f", r["mean_cost_usd"].get<double>()),
                                fmt("%.1f", r["successes_per_dollar"].get<double>()),
                                maybe(r, "cost_reduction_pct", "%.1f%%")});
        std::string path = out_dir + "/sensitivity" + ext;
        write_file(path, render(cols, rows, format));
        written.push_back(path);
    }

    {
        std::vector<Column> cols = {{"metric", "", 'l'},
                                    {"full_randomized", "Full Randomized", 'r'},
                                    {"complete_case", "Complete-Case", 'r'}};
        std::vector<std::vector<std::string>> rows;
        if (results.contains("missingness") &&
            results["missingness"].contains("composition_shift")) {
            const auto& shift = results["missingness"]["composition_shift"];
            const auto& full = shift["full_randomized"];
            const auto& cc = shift["complete_case"];
            rows.push_back({"n", std::to_string(full["n"].get<std::int64_t>()),
                            std::to_string(cc["n"].get<std::int64_t>())});
            if (full.contains("mean_est_tokens"))
                rows.push_back({"mean_est_tokens",
                                fmt("%.1f", full["mean_est_tokens"].get<double>()),
                                cc.contains("mean_est_tokens")
                                    ? fmt("%.1f", cc["mean_est_tokens"].get<double>())
                                    : ""});
            if (full.contains("median_est_tokens"))
                rows.push_back({"median_est_tokens",
                                fmt("%.1f", full["median_est_tokens"].get<double>()),
                                cc.contains("median_est_tokens")
                                    ? fmt("%.1f", cc["median_est_tokens"].get<double>())
                                    : ""});
            for (const char* section : {"task_type_counts", "tercile_counts", "source_counts"}) {
                for (const auto& [key, value] : full[section].items()) {
                    std::int64_t cc_count = 0;
                    if (cc[section].contains(key)) cc_count = cc[section][key].get<std::int64_t>();
                    rows.push_back({std::string(section) + ":" + key,
                                    std::to_string(value.get<std::int64_t>()),
                                    std::to_string(cc_count)});
                }
            }
        }
        std::string path = out_dir + "/missingness" + ext;
        write_file(path, render(cols, rows, format));
        written.push_back(path);
    }

    return written;
}

std::string figure_data_csv(const std::vector<TrialRecord>& full_log,
                            const std::vector<ScoreRecord>& scores) {
    std::vector<TrialRecord> log = dedupe_latest(full_log);
    std::map<std::string, const ScoreRecord*> score_by_id;
    for (const ScoreRecord& s : scores) score_by_id[s.stimulus_id] = &s;
    std::string out =
        "stimulus_id,arm,outcome,realized_ratio,input_tokens,output_tokens,cost_usd,similarity\n";
    for (const TrialRecord& r : log) {
        out += r.stimulus_id;
        out += ',';
        out += arm_name(r.arm);
        out += ',';
        out += trial_outcome_name(r.outcome);
        out += ',';
        out += fmt("%.6f", r.realized_ratio);
        out += ',';
        out += r.input_tokens ? std::to_string(*r.input_tokens) : "";
        out += ',';
        out += r.output_tokens ? std::to_string(*r.output_tokens) : "";
        out += ',';
        out += usd_string(r.cost.total);
        out += ',';
        auto it = score_by_id.find(r.stimulus_id);
        if (it != score_by_id.end()) out += fmt("%.6f", it->second->value);
        out += '\n';
    }
    return out;
}

} // namespace prct
