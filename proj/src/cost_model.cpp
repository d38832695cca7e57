#include "prct/cost_model.hpp"

#include <cmath>
#include <cstdio>

#include "prct/errors.hpp"

namespace prct {

std::string usd_string(MicroUsd v) {
    char buf[40];
    MicroUsd a = v < 0 ? -v : v;
    std::snprintf(buf, sizeof(buf), "%s%lld.%06lld", v < 0 ? "-" : "",
                  static_cast<long long>(a / 1000000), static_cast<long long>(a % 1000000));
    return buf;
}

double usd_value(MicroUsd v) { return double(v) / 1e6; }

CostBreakdown trial_cost(const TokenUsage& usage, const PricingModel& pricing) {
    CostBreakdown c;
    c.input_cost = MicroUsd(std::llround(double(usage.input_tokens) * pricing.input_usd_per_mtok));
    c.output_cost = MicroUsd(std::llround(double(usage.output_tokens) * pricing.output_usd_per_mtok));
    c.total = c.input_cost + c.output_cost;
    return c;
}

double savings(double control_cost_usd, double treatment_cost_usd) {
    if (control_cost_usd == 0.0)
        throw DegenerateInputError("savings undefined: control cost is zero");
    return 1.0 - treatment_cost_usd / control_cost_usd;
}

double expansion_ratio(std::int64_t treatment_out, std::int64_t control_out) {
    if (control_out == 0)
        throw DegenerateInputError("expansion ratio undefined: control produced zero output tokens");
    return double(treatment_out) / double(control_out);
}

BreakEvenResult max_expansion(double r, double input_tokens, double baseline_output_tokens,
                              double price_ratio) {
    if (!(r > 0.0 && r <= 1.0))
        throw DegenerateInputError("max_expansion requires retention r in (0, 1]");
    if (baseline_output_tokens <= 0.0)
        throw DegenerateInputError(
            "max_expansion undefined: no baseline output tokens (O must be > 0)");
    if (price_ratio <= 0.0)
        throw DegenerateInputError("max_expansion requires price ratio k > 0");
    BreakEvenResult out;
    out.r = r;
    out.e_max = 1.0 + (1.0 - r) * input_tokens / (price_ratio * baseline_output_tokens);
    return out;
}

std::vector<BreakEvenResult> breakeven_surface(double input_tokens, double baseline_output_tokens,
                                               double price_ratio, const std::vector<double>& r_grid,
                                               std::optional<double> observed_e) {
    std::vector<BreakEvenResult> rows;
    rows.reserve(r_grid.size());
    for (double r : r_grid) {
        BreakEvenResult row = max_expansion(r, input_tokens, baseline_output_tokens, price_ratio);
        if (observed_e) row.margin = row.e_max - *observed_e;
        rows.push_back(row);
    }
    return rows;
}

std::string breakeven_csv(const std::vector<BreakEvenResult>& rows) {
    std::string out = "r,e_max,margin\n";
    char buf[96];
    for (const auto& row : rows) {
        if (row.margin)
            std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f\n", row.r, row.e_max, *row.margin);
        else
            std::snprintf(buf, sizeof(buf), "%.6f,%.6f,\n", row.r, row.e_max);
        out += buf;
    }
    return out;
}

double total_cost_usd(double r, double e, double input_tokens, double baseline_output_tokens,
                      const PricingModel& pricing) {
    return (r * input_tokens * pricing.input_usd_per_mtok +
            e * baseline_output_tokens * pricing.output_usd_per_mtok) /
           1e6;
}

double cost_savings_usd(double r, double e, double input_tokens, double baseline_output_tokens,
                        const PricingModel& pricing) {
    return (input_tokens * pricing.input_usd_per_mtok * (1.0 - r) -
            baseline_output_tokens * pricing.output_usd_per_mtok * (e - 1.0)) /
           1e6;
}

} // namespace prct
