#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace prct {

// USD amounts are stored as exact integers in micro-dollars (6 decimal
// places); per-trial costs are ~10^-3 USD, so double rounding drift in
// stored values is not acceptable.
using MicroUsd = std::int64_t;

std::string usd_string(MicroUsd v); // fixed 6 decimal places
double usd_value(MicroUsd v);

struct PricingModel {
    // Published API rates, USD per million tokens. Numerically these are
    // also micro-USD per token, which keeps per-trial cost arithmetic exact
    // for whole-dollar-per-million prices.
    double input_usd_per_mtok = 3.0;
    double output_usd_per_mtok = 15.0;

    // Output-to-input price ratio k; always recomputed.
    double price_ratio() const { return output_usd_per_mtok / input_usd_per_mtok; }
};

struct TokenUsage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

struct CostBreakdown {
    MicroUsd input_cost = 0;
    MicroUsd output_cost = 0;
    MicroUsd total = 0;
    std::optional<double> savings_vs_baseline; // fraction, >0 means cheaper
    std::optional<double> expansion_ratio;
};

struct BreakEvenResult {
    double r = 1.0;
    double e_max = 1.0;
    std::optional<double> margin; // e_max - observed expansion
};

// Exact per-trial cost from provider-attributed token counts.
CostBreakdown trial_cost(const TokenUsage& usage, const PricingModel& pricing);

// 1 - treatment/control; positive means the treatment is cheaper.
// Throws DegenerateInputError when control_cost is zero.
double savings(double control_cost_usd, double treatment_cost_usd);

// e = treatment_out / control_out. Throws DegenerateInputError on zero
// control output.
double expansion_ratio(std::int64_t treatment_out, std::int64_t control_out);

// e_max = 1 + (1 - r) * I / (k * O).
BreakEvenResult max_expansion(double r, double input_tokens, double baseline_output_tokens,
                              double price_ratio);

// One BreakEvenResult per grid value; margins filled when observed_e given.
std::vector<BreakEvenResult> breakeven_surface(double input_tokens, double baseline_output_tokens,
                                               double price_ratio, const std::vector<double>& r_grid,
                                               std::optional<double> observed_e = std::nullopt);

// CSV rendering of a break-even surface: columns r,e_max,margin at 6 dp.
std::string breakeven_csv(const std::vector<BreakEvenResult>& rows);

// Continuous-form cost algebra used by the break-even identities. These
// operate on real token counts (r*I need not be integral).
double total_cost_usd(double r, double e, double input_tokens, double baseline_output_tokens,
                      const PricingModel& pricing);
double cost_savings_usd(double r, double e, double input_tokens, double baseline_output_tokens,
                        const PricingModel& pricing);

} // namespace prct
