#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "prct/cost_model.hpp"
#include "prct/errors.hpp"
#include "prct/rng.hpp"

using namespace prct;

TEST_CASE("trial_cost matches pilot arm means") {
    PricingModel pricing; // $3 / $15 per Mtok
    CHECK(trial_cost({59, 609}, pricing).total == 9312);   // $0.009312
    CHECK(trial_cost({30, 161}, pricing).total == 2505);   // $0.002505
    CHECK(trial_cost({0, 0}, pricing).total == 0);
    CHECK(usd_string(trial_cost({59, 609}, pricing).total) == "0.009312");
    CHECK(usd_string(0) == "0.000000");
    CHECK(usd_string(-1500000) == "-1.500000");
}

TEST_CASE("trial_cost components and linearity") {
    PricingModel pricing;
    auto c = trial_cost({100, 10}, pricing);
    CHECK(c.input_cost == 300);
    CHECK(c.output_cost == 150);
    CHECK(c.total == c.input_cost + c.output_cost);

    // token-wise additivity under integer per-Mtok prices
    rng::Engine eng(11);
    for (int i = 0; i < 1000; ++i) {
        PricingModel p;
        p.input_usd_per_mtok = double(1 + rng::bounded(eng, 30));
        p.output_usd_per_mtok = double(1 + rng::bounded(eng, 90));
        TokenUsage a{std::int64_t(rng::bounded(eng, 100000)),
                     std::int64_t(rng::bounded(eng, 100000))};
        TokenUsage b{std::int64_t(rng::bounded(eng, 100000)),
                     std::int64_t(rng::bounded(eng, 100000))};
        TokenUsage ab{a.input_tokens + b.input_tokens, a.output_tokens + b.output_tokens};
        CHECK(trial_cost(ab, p).total == trial_cost(a, p).total + trial_cost(b, p).total);
    }
}

TEST_CASE("savings sign convention") {
    CHECK(savings(0.0141, 0.0101) == doctest::Approx(0.2837).epsilon(0.01));
    CHECK(savings(0.0141, 0.0143) == doctest::Approx(-0.0142).epsilon(0.01));
    CHECK(savings(0.5, 0.5) == 0.0);
    CHECK_THROWS_AS(savings(0.0, 0.1), DegenerateInputError);
}

TEST_CASE("expansion ratio") {
    CHECK(expansion_ratio(946, 916) == doctest::Approx(1.0328).epsilon(0.001));
    CHECK(expansion_ratio(609, 609) == 1.0);
    CHECK(expansion_ratio(161, 609) == doctest::Approx(0.264).epsilon(0.01));
    CHECK_THROWS_AS(expansion_ratio(100, 0), DegenerateInputError);
}

TEST_CASE("max_expansion reproduces the worked break-even values") {
    CHECK(max_expansion(0.5, 107, 916, 5).e_max == doctest::Approx(1.0117).epsilon(0.0005));
    CHECK(max_expansion(0.2, 107, 916, 5).e_max == doctest::Approx(1.0187).epsilon(0.0005));
    CHECK(max_expansion(1.0, 107, 916, 5).e_max == 1.0);
    // r=0.5, I/O=0.5, k=5 -> exactly 1.05
    CHECK(max_expansion(0.5, 50, 100, 5).e_max == doctest::Approx(1.05).epsilon(1e-12));
    CHECK_THROWS_AS(max_expansion(0.5, 10, 0, 5), DegenerateInputError);
    CHECK_THROWS_AS(max_expansion(0.0, 10, 10, 5), DegenerateInputError);
}

TEST_CASE("breakeven surface rows, margins and limits") {
    auto rows = breakeven_surface(107, 916, 5, {0.2, 0.5, 1.0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].e_max == doctest::Approx(1.0187).epsilon(0.0005));
    CHECK(rows[1].e_max == doctest::Approx(1.0117).epsilon(0.0005));
    CHECK(rows[2].e_max == 1.0);
    CHECK(rows[0].e_max > rows[1].e_max);
    CHECK(rows[1].e_max > rows[2].e_max);
    CHECK_FALSE(rows[0].margin.has_value());

    auto with_margin = breakeven_surface(107, 916, 5, {0.5}, 1.0328);
    CHECK(*with_margin[0].margin == doctest::Approx(1.011681 - 1.0328).epsilon(1e-6));

    // k -> infinity collapses tolerance to zero expansion
    for (double r : {0.1, 0.5, 0.9})
        CHECK(max_expansion(r, 107, 916, 1e9).e_max == doctest::Approx(1.0).epsilon(1e-6));

    std::string csv = breakeven_csv(rows);
    CHECK(csv.find("r,e_max,margin\n") == 0);
    CHECK(csv.find("0.200000,1.018690,") != std::string::npos);
    CHECK(csv.find("0.500000,1.011681,") != std::string::npos);
}

TEST_CASE("savings identity: closed form equals cost difference") {
    rng::Engine eng(99);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        double r = 0.01 + 0.99 * rng::uniform01(eng);
        double e = 0.1 + 3.0 * rng::uniform01(eng);
        double I = 1.0 + 5000.0 * rng::uniform01(eng);
        double O = 1.0 + 5000.0 * rng::uniform01(eng);
        PricingModel p;
        p.input_usd_per_mtok = 0.5 + 30.0 * rng::uniform01(eng);
        p.output_usd_per_mtok = 0.5 + 90.0 * rng::uniform01(eng);

        double baseline = total_cost_usd(1.0, 1.0, I, O, p);
        double compressed = total_cost_usd(r, e, I, O, p);
        double delta = cost_savings_usd(r, e, I, O, p);
        double scale = std::max({1e-9, std::fabs(delta), baseline});
        CHECK(std::fabs(delta - (baseline - compressed)) / scale < 1e-12);

        // break-even consistency: at e == e_max the savings vanish
        double k = p.price_ratio();
        double e_max = max_expansion(r, I, O, k).e_max;
        double at_breakeven = cost_savings_usd(r, e_max, I, O, p);
        CHECK(std::fabs(at_breakeven) / std::max(1e-9, baseline) < 1e-12);
        ++checked;
    }
    CHECK(checked == 10000);
}

TEST_CASE("e_max monotonicities") {
    // strictly decreasing in r
    double prev = max_expansion(0.1, 107, 916, 5).e_max;
    for (double r : {0.3, 0.5, 0.7, 0.9, 1.0}) {
        double cur = max_expansion(r, 107, 916, 5).e_max;
        CHECK(cur < prev);
        prev = cur;
    }
    // strictly increasing in I/O
    CHECK(max_expansion(0.5, 200, 916, 5).e_max > max_expansion(0.5, 100, 916, 5).e_max);
    CHECK(max_expansion(0.5, 107, 500, 5).e_max > max_expansion(0.5, 107, 916, 5).e_max);
    // strictly decreasing in k
    CHECK(max_expansion(0.5, 107, 916, 10).e_max < max_expansion(0.5, 107, 916, 5).e_max);
}
