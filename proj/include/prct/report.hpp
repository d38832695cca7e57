#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "prct/harness/harness.hpp"
#include "prct/similarity.hpp"

namespace prct {

enum class TableFormat { csv, latex };
TableFormat table_format_from_name(const std::string& name);

// Renders the five report tables (arm summary, similarity by arm, Pareto,
// assignment sensitivity, missingness) from a results document into
// out_dir; returns the written paths. LaTeX tables use booktabs rules; CSV
// values round-trip losslessly at the printed precision.
std::vector<std::string> render_tables(const nlohmann::ordered_json& results,
                                       TableFormat format, const std::string& out_dir);

// Tidy per-trial observations (one row per trial) for external plotting.
std::string figure_data_csv(const std::vector<TrialRecord>& log,
                            const std::vector<ScoreRecord>& scores);

} // namespace prct
