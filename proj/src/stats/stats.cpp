#include "prct/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "prct/errors.hpp"
#include "prct/rng.hpp"
#include "prct/stats/dist.hpp"

namespace prct::stats {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_n(const Sample& s, std::size_t min_n, const char* test) {
    if (s.n() < min_n)
        throw InsufficientDataError(std::string(test) + ": sample '" + s.label + "' has n=" +
                                    std::to_string(s.n()) + ", needs at least " +
                                    std::to_string(min_n));
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return kNaN;
    if (sorted.size() == 1) return sorted[0];
    double h = q * double(sorted.size() - 1);
    std::size_t lo = std::size_t(std::floor(h));
    if (lo >= sorted.size() - 1) return sorted.back();
    double frac = h - double(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

ConfidenceInterval percentile_interval(std::vector<double> stats, double level) {
    std::sort(stats.begin(), stats.end());
    ConfidenceInterval ci;
    ci.level = level;
    ci.method = "percentile bootstrap";
    double alpha = (1.0 - level) / 2.0;
    ci.low = quantile_sorted(stats, alpha);
    ci.high = quantile_sorted(stats, 1.0 - alpha);
    return ci;
}

std::vector<double> resample(rng::Engine& eng, const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[rng::bounded(eng, v.size())];
    return out;
}

// Midranks of the pooled values, plus the tie-correction denominator term.
void midranks(const std::vector<double>& pooled, std::vector<double>& ranks, double& tie_sum) {
    std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    ranks.assign(n, 0.0);
    tie_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        double r = 0.5 * double(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        double t = double(j - i + 1);
        tie_sum += t * t * t - t;
        i = j + 1;
    }
}

} // namespace

double mean(const std::vector<double>& v) {
    if (v.empty()) throw InsufficientDataError("mean of empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double variance(const std::vector<double>& v) {
    if (v.size() < 2) throw InsufficientDataError("variance needs n >= 2");
    double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / double(v.size() - 1);
}

double median(std::vector<double> v) {
    if (v.empty()) throw InsufficientDataError("median of empty sample");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TestReport welch_t(const Sample& a, const Sample& b) {
    require_n(a, 2, "welch_t");
    require_n(b, 2, "welch_t");
    TestReport r;
    r.test_name = "welch_t";
    r.df2 = kNaN;
    double ma = mean(a.values), mb = mean(b.values);
    double va = variance(a.values) / double(a.n());
    double vb = variance(b.values) / double(b.n());
    if (va + vb == 0.0) {
        if (ma == mb) {
            r.statistic = 0.0;
            r.df1 = double(a.n() + b.n() - 2);
            r.p_value = 1.0;
            r.notes.push_back("degenerate: both samples constant and equal; p = 1 by convention");
        } else {
            r.statistic = ma > mb ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
            r.df1 = double(a.n() + b.n() - 2);
            r.p_value = 0.0;
            r.notes.push_back("degenerate: zero variance with separated means; p -> 0");
        }
        return r;
    }
    double se = std::sqrt(va + vb);
    r.statistic = (ma - mb) / se;
    r.df1 = (va + vb) * (va + vb) /
            (va * va / double(a.n() - 1) + vb * vb / double(b.n() - 1));
    r.p_value = t_two_sided_p(r.statistic, r.df1);
    return r;
}

TestReport welch_anova(const std::vector<Sample>& groups) {
    if (groups.size() < 2) throw InsufficientDataError("welch_anova needs at least 2 groups");
    for (const Sample& g : groups) {
        require_n(g, 2, "welch_anova");
        if (variance(g.values) == 0.0)
            throw InsufficientDataError("welch_anova: group '" + g.label + "' has zero variance");
    }
    const double k = double(groups.size());
    double W = 0.0, mw = 0.0;
    std::vector<double> w(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        w[i] = double(groups[i].n()) / variance(groups[i].values);
        W += w[i];
        mw += w[i] * mean(groups[i].values);
    }
    mw /= W;
    double A = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        double d = mean(groups[i].values) - mw;
        A += w[i] * d * d;
    }
    A /= (k - 1.0);
    double S = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        double u = 1.0 - w[i] / W;
        S += u * u / double(groups[i].n() - 1);
    }
    double B = 2.0 * (k - 2.0) / (k * k - 1.0) * S;
    TestReport r;
    r.test_name = "welch_anova";
    r.statistic = A / (1.0 + B);
    r.df1 = k - 1.0;
    r.df2 = (k * k - 1.0) / (3.0 * S);
    r.p_value = f_upper_p(r.statistic, r.df1, r.df2);
    r.effect_size = EffectSize{"eta_squared", eta_squared(groups)};
    return r;
}

TestReport classic_anova(const std::vector<Sample>& groups) {
    if (groups.size() < 2) throw InsufficientDataError("classic_anova needs at least 2 groups");
    std::size_t N = 0;
    double grand = 0.0;
    for (const Sample& g : groups) {
        require_n(g, 2, "classic_anova");
        N += g.n();
        grand += std::accumulate(g.values.begin(), g.values.end(), 0.0);
    }
    grand /= double(N);
    double ssb = 0.0, ssw = 0.0;
    for (const Sample& g : groups) {
        double m = mean(g.values);
        ssb += double(g.n()) * (m - grand) * (m - grand);
        for (double x : g.values) ssw += (x - m) * (x - m);
    }
    TestReport r;
    r.test_name = "classic_anova";
    r.df1 = double(groups.size() - 1);
    r.df2 = double(N - groups.size());
    if (ssw == 0.0) {
        if (ssb == 0.0) {
            r.statistic = 0.0;
            r.p_value = 1.0;
            r.notes.push_back("degenerate: zero variance everywhere; F = 0, p = 1 by convention");
        } else {
            r.statistic = std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
            r.notes.push_back("degenerate: zero within-group variance with separated means");
        }
    } else {
        r.statistic = (ssb / r.df1) / (ssw / r.df2);
        r.p_value = f_upper_p(r.statistic, r.df1, r.df2);
    }
    r.effect_size = EffectSize{"eta_squared", (ssb + ssw) == 0.0 ? 0.0 : ssb / (ssb + ssw)};
    return r;
}

double cohens_d(const Sample& a, const Sample& b) {
    require_n(a, 2, "cohens_d");
    require_n(b, 2, "cohens_d");
    double na = double(a.n()), nb = double(b.n());
    double pooled =
        ((na - 1.0) * variance(a.values) + (nb - 1.0) * variance(b.values)) / (na + nb - 2.0);
    if (pooled == 0.0) throw DegenerateInputError("cohens_d undefined: pooled SD is zero");
    return (mean(a.values) - mean(b.values)) / std::sqrt(pooled);
}

double eta_squared(const std::vector<Sample>& groups) {
    if (groups.empty()) throw InsufficientDataError("eta_squared needs groups");
    std::size_t N = 0;
    double grand = 0.0;
    for (const Sample& g : groups) {
        N += g.n();
        grand += std::accumulate(g.values.begin(), g.values.end(), 0.0);
    }
    if (N == 0) throw InsufficientDataError("eta_squared: empty groups");
    grand /= double(N);
    double ssb = 0.0, sst = 0.0;
    for (const Sample& g : groups) {
        double m = mean(g.values);
        ssb += double(g.n()) * (m - grand) * (m - grand);
        for (double x : g.values) sst += (x - grand) * (x - grand);
    }
    return sst == 0.0 ? 0.0 : ssb / sst;
}

std::vector<double> holm_adjust(const std::vector<double>& p_values) {
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<double> adjusted(m, 0.0);
    double running_max = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double adj = std::min(1.0, double(m - i) * p_values[order[i]]);
        running_max = std::max(running_max, adj);
        adjusted[order[i]] = running_max;
    }
    return adjusted;
}

ConfidenceInterval bootstrap_ci_mean(const Sample& s, int B, double level, std::uint64_t seed) {
    require_n(s, 2, "bootstrap_ci_mean");
    rng::Engine eng(seed);
    std::vector<double> stats(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) stats[std::size_t(b)] = mean(resample(eng, s.values));
    return percentile_interval(std::move(stats), level);
}

ConfidenceInterval bootstrap_ci_mean_difference(const Sample& a, const Sample& b, int B,
                                                double level, std::uint64_t seed) {
    require_n(a, 2, "bootstrap_ci_mean_difference");
    require_n(b, 2, "bootstrap_ci_mean_difference");
    rng::Engine eng(seed);
    std::vector<double> stats(static_cast<std::size_t>(B));
    for (int i = 0; i < B; ++i)
        stats[std::size_t(i)] = mean(resample(eng, a.values)) - mean(resample(eng, b.values));
    return percentile_interval(std::move(stats), level);
}

ConfidenceInterval bootstrap_ci_ratio_of_means(const Sample& numerator, const Sample& denominator,
                                               int B, double level, std::uint64_t seed) {
    require_n(numerator, 2, "bootstrap_ci_ratio_of_means");
    require_n(denominator, 2, "bootstrap_ci_ratio_of_means");
    rng::Engine eng(seed);
    std::vector<double> stats;
    stats.reserve(std::size_t(B));
    for (int i = 0; i < B; ++i) {
        double num = mean(resample(eng, numerator.values));
        double den = mean(resample(eng, denominator.values));
        if (den == 0.0) continue; // degenerate resample; skipped, noted by caller if it matters
        stats.push_back(num / den);
    }
    return percentile_interval(std::move(stats), level);
}

TestReport permutation_test(const Sample& a, const Sample& b, int n_perm, std::uint64_t seed,
                            double exact_cutoff) {
    if (a.n() < 1 || b.n() < 1)
        throw InsufficientDataError("permutation_test needs at least one value per sample");
    const std::size_t na = a.n(), n = a.n() + b.n();
    std::vector<double> pooled = a.values;
    pooled.insert(pooled.end(), b.values.begin(), b.values.end());
    const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
    auto diff_from_sum_a = [&](double sum_a) {
        return sum_a / double(na) - (total - sum_a) / double(n - na);
    };
    const double observed = diff_from_sum_a(
        std::accumulate(a.values.begin(), a.values.end(), 0.0));
    const double tol = 1e-12 * std::max(1.0, std::fabs(observed));

    // Exhaustive when the arrangement count is small enough.
    double arrangements = 1.0;
    for (std::size_t i = 0; i < na; ++i)
        arrangements = arrangements * double(n - i) / double(i + 1);
    TestReport r;
    r.test_name = "permutation_test";
    r.statistic = observed;
    r.df1 = kNaN;
    r.df2 = kNaN;
    if (arrangements <= exact_cutoff) {
        std::vector<std::size_t> idx(na);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        long long hits = 0, count = 0;
        while (true) {
            double sum_a = 0.0;
            for (std::size_t i : idx) sum_a += pooled[i];
            if (std::fabs(diff_from_sum_a(sum_a)) >= std::fabs(observed) - tol) ++hits;
            ++count;
            // advance combination
            std::size_t i = na;
            while (i > 0 && idx[i - 1] == n - na + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < na; ++j) idx[j] = idx[j - 1] + 1;
        }
        r.p_value = double(hits) / double(count);
        r.notes.push_back("exact enumeration over " + std::to_string(count) + " arrangements");
    } else {
        rng::Engine eng(seed);
        long long hits = 0;
        std::vector<double> shuffled = pooled;
        for (int p = 0; p < n_perm; ++p) {
            rng::shuffle(eng, shuffled);
            double sum_a = std::accumulate(shuffled.begin(), shuffled.begin() + long(na), 0.0);
            if (std::fabs(diff_from_sum_a(sum_a)) >= std::fabs(observed) - tol) ++hits;
        }
        r.p_value = double(1 + hits) / double(n_perm + 1);
        r.notes.push_back("monte carlo with " + std::to_string(n_perm) + " permutations");
    }
    return r;
}

double trimmed_mean(const Sample& s, double trim) {
    if (s.n() == 0) throw InsufficientDataError("trimmed_mean of empty sample");
    if (trim < 0.0 || trim >= 0.5)
        throw DegenerateInputError("trimmed_mean requires trim in [0, 0.5)");
    std::vector<double> v = s.values;
    std::sort(v.begin(), v.end());
    std::size_t g = std::size_t(std::floor(trim * double(v.size())));
    if (2 * g >= v.size())
        throw InsufficientDataError("trimmed_mean: trim removes the entire sample");
    double sum = 0.0;
    for (std::size_t i = g; i < v.size() - g; ++i) sum += v[i];
    return sum / double(v.size() - 2 * g);
}

TestReport kruskal_wallis(const std::vector<Sample>& groups) {
    if (groups.size() < 2) throw InsufficientDataError("kruskal_wallis needs at least 2 groups");
    std::vector<double> pooled;
    for (const Sample& g : groups) {
        require_n(g, 1, "kruskal_wallis");
        pooled.insert(pooled.end(), g.values.begin(), g.values.end());
    }
    const double N = double(pooled.size());
    std::vector<double> ranks;
    double tie_sum = 0.0;
    midranks(pooled, ranks, tie_sum);
    TestReport r;
    r.test_name = "kruskal_wallis";
    r.df1 = double(groups.size() - 1);
    r.df2 = kNaN;
    double correction = 1.0 - tie_sum / (N * N * N - N);
    if (correction <= 0.0) {
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.notes.push_back("all values identical; H = 0, p = 1 by convention");
        return r;
    }
    double h = 0.0;
    std::size_t offset = 0;
    for (const Sample& g : groups) {
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < g.n(); ++i) rank_sum += ranks[offset + i];
        offset += g.n();
        h += rank_sum * rank_sum / double(g.n());
    }
    h = 12.0 / (N * (N + 1.0)) * h - 3.0 * (N + 1.0);
    r.statistic = h / correction;
    r.p_value = chi2_upper_p(r.statistic, r.df1);
    return r;
}

TestReport levene_test(const std::vector<Sample>& groups, LeveneCenter center) {
    if (groups.size() < 2) throw InsufficientDataError("levene_test needs at least 2 groups");
    std::vector<Sample> deviations;
    deviations.reserve(groups.size());
    for (const Sample& g : groups) {
        require_n(g, 2, "levene_test");
        double c = center == LeveneCenter::median ? median(g.values) : mean(g.values);
        Sample d;
        d.label = g.label;
        d.values.reserve(g.n());
        for (double x : g.values) d.values.push_back(std::fabs(x - c));
        deviations.push_back(std::move(d));
    }
    TestReport r = classic_anova(deviations);
    r.test_name = center == LeveneCenter::median ? "levene_median" : "levene_mean";
    r.effect_size.reset();
    return r;
}

TestReport chi_square_independence(const std::vector<std::vector<double>>& table) {
    const std::size_t rows = table.size();
    if (rows < 2) throw InsufficientDataError("chi_square_independence needs >= 2 rows");
    const std::size_t cols = table[0].size();
    if (cols < 2) throw InsufficientDataError("chi_square_independence needs >= 2 columns");
    for (const auto& row : table)
        if (row.size() != cols)
            throw DegenerateInputError("chi_square_independence: ragged table");
    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            if (table[i][j] < 0.0)
                throw DegenerateInputError("chi_square_independence: negative count");
            row_sum[i] += table[i][j];
            col_sum[j] += table[i][j];
            total += table[i][j];
        }
    for (std::size_t i = 0; i < rows; ++i)
        if (row_sum[i] == 0.0)
            throw DegenerateInputError("chi_square_independence: zero marginal in row " +
                                       std::to_string(i));
    for (std::size_t j = 0; j < cols; ++j)
        if (col_sum[j] == 0.0)
            throw DegenerateInputError("chi_square_independence: zero marginal in column " +
                                       std::to_string(j));
    double stat = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            double expected = row_sum[i] * col_sum[j] / total;
            double d = table[i][j] - expected;
            stat += d * d / expected;
        }
    TestReport r;
    r.test_name = "chi_square_independence";
    r.statistic = stat;
    r.df1 = double((rows - 1) * (cols - 1));
    r.df2 = kNaN;
    r.p_value = chi2_upper_p(stat, r.df1);
    return r;
}

TestReport pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw DegenerateInputError("pearson_correlation: length mismatch");
    if (x.size() < 3) throw InsufficientDataError("pearson_correlation needs n >= 3");
    double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw DegenerateInputError("pearson_correlation undefined: zero variance input");
    TestReport r;
    r.test_name = "pearson_correlation";
    r.statistic = sxy / std::sqrt(sxx * syy);
    r.df1 = double(x.size() - 2);
    r.df2 = kNaN;
    double rr = std::min(1.0, std::max(-1.0, r.statistic));
    if (std::fabs(rr) >= 1.0) {
        r.p_value = 0.0;
        r.notes.push_back("perfect correlation; p -> 0");
    } else {
        double t = rr * std::sqrt(r.df1 / (1.0 - rr * rr));
        r.p_value = t_two_sided_p(t, r.df1);
    }
    return r;
}

TestReport normality_check(const Sample& s) {
    if (s.n() < 8)
        throw InsufficientDataError("normality_check requires n >= 8 (got " +
                                    std::to_string(s.n()) + ")");
    const double n = double(s.n());
    double m = mean(s.values);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : s.values) {
        double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 == 0.0) throw DegenerateInputError("normality_check: zero-variance sample");

    // Skewness component (D'Agostino).
    double g1 = m3 / std::pow(m2, 1.5);
    double y = g1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
    double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                   ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
    double delta = 1.0 / std::sqrt(std::log(std::sqrt(w2)));
    double alpha = std::sqrt(2.0 / (w2 - 1.0));
    double z1 = delta * std::asinh(y / alpha);

    // Kurtosis component (Anscombe-Glynn).
    double b2 = m4 / (m2 * m2);
    double eb2 = 3.0 * (n - 1.0) / (n + 1.0);
    double vb2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    double x = (b2 - eb2) / std::sqrt(vb2);
    double sqrt_b1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                     std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
    double a = 6.0 + 8.0 / sqrt_b1 * (2.0 / sqrt_b1 + std::sqrt(1.0 + 4.0 / (sqrt_b1 * sqrt_b1)));
    double z2 = ((1.0 - 2.0 / (9.0 * a)) -
                 std::cbrt((1.0 - 2.0 / a) / (1.0 + x * std::sqrt(2.0 / (a - 4.0))))) /
                std::sqrt(2.0 / (9.0 * a));

    TestReport r;
    r.test_name = "moment_normality";
    r.statistic = z1 * z1 + z2 * z2;
    r.df1 = 2.0;
    r.df2 = kNaN;
    r.p_value = chi2_upper_p(r.statistic, 2.0);
    r.notes.push_back("moment-based omnibus; substitute for Shapiro-Wilk");
    return r;
}

} // namespace prct::stats
