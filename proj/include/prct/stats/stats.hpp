#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace prct::stats {

struct Sample {
    std::string label;
    std::vector<double> values;
    std::size_t n() const { return values.size(); }
};

struct EffectSize {
    std::string name;
    double value = 0.0;
};

struct ConfidenceInterval {
    double low = 0.0;
    double high = 0.0;
    double level = 0.95;
    std::string method;
};

struct TestReport {
    std::string test_name;
    double statistic = 0.0;
    double df1 = 0.0;
    double df2 = 0.0; // NaN when the test has a single df
    double p_value = 1.0;
    std::optional<EffectSize> effect_size;
    std::optional<ConfidenceInterval> ci;
    std::vector<std::string> notes;
};

// Basic moments. variance() uses the n-1 divisor.
double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);
double median(std::vector<double> v);

// Welch's unequal-variance t-test, two-sided.
TestReport welch_t(const Sample& a, const Sample& b);

// Welch's one-way ANOVA with eta-squared attached as effect size.
TestReport welch_anova(const std::vector<Sample>& groups);

// Classic one-way ANOVA (the balance gate's length check).
TestReport classic_anova(const std::vector<Sample>& groups);

double cohens_d(const Sample& a, const Sample& b);
double eta_squared(const std::vector<Sample>& groups);

// Bonferroni-Holm step-down; returns adjusted p-values in input order.
std::vector<double> holm_adjust(const std::vector<double>& p_values);

// Percentile bootstrap intervals; deterministic given seed.
ConfidenceInterval bootstrap_ci_mean(const Sample& s, int B = 10000, double level = 0.95,
                                     std::uint64_t seed = 0);
ConfidenceInterval bootstrap_ci_mean_difference(const Sample& a, const Sample& b, int B = 10000,
                                                double level = 0.95, std::uint64_t seed = 0);
// Ratio of means with the two samples resampled independently.
ConfidenceInterval bootstrap_ci_ratio_of_means(const Sample& numerator, const Sample& denominator,
                                               int B = 10000, double level = 0.95,
                                               std::uint64_t seed = 0);

// Two-sided permutation test of the mean difference. Exhaustive enumeration
// replaces Monte Carlo whenever C(n_a + n_b, n_a) <= exact_cutoff; an
// exact_cutoff of 0 forces Monte Carlo.
TestReport permutation_test(const Sample& a, const Sample& b, int n_perm = 10000,
                            std::uint64_t seed = 0, double exact_cutoff = 20000.0);

double trimmed_mean(const Sample& s, double trim = 0.05);

// Kruskal-Wallis H with midrank tie correction.
TestReport kruskal_wallis(const std::vector<Sample>& groups);

enum class LeveneCenter { median, mean };
TestReport levene_test(const std::vector<Sample>& groups,
                       LeveneCenter center = LeveneCenter::median);

// Pearson chi-square for independence on a counts matrix.
TestReport chi_square_independence(const std::vector<std::vector<double>>& table);

TestReport pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);

// Moment-based (skewness + kurtosis) omnibus normality check, chi-square
// with 2 df. Requires n >= 8.
TestReport normality_check(const Sample& s);

} // namespace prct::stats
