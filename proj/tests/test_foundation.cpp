#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "prct/rng.hpp"
#include "prct/sha256.hpp"
#include "prct/text.hpp"
#include "prct/timefmt.hpp"

using namespace prct;

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // multi-block input
    std::string million(1000000, 'a');
    CHECK(sha256_hex(million) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
    CHECK(sha256_hex16("abc") == "ba7816bf8f01cfea");
}

TEST_CASE("sha256 incremental matches one-shot") {
    Sha256 h;
    h.update("hello ");
    h.update("world");
    CHECK(h.hex_digest() == sha256_hex("hello world"));
}

TEST_CASE("utf8 length counts scalars not bytes") {
    CHECK(utf8_length("hello") == 5);
    CHECK(utf8_length("") == 0);
    CHECK(utf8_length("\xC3\xA9t\xC3\xA9") == 3);            // e-acute, t, e-acute
    CHECK(utf8_length("\xE4\xBD\xA0\xE5\xA5\xBD") == 2);     // two CJK scalars
    CHECK(utf8_length("\xF0\x9F\x98\x80") == 1);             // one emoji
}

TEST_CASE("split_words finds maximal non-whitespace runs") {
    auto words = split_words("  alpha\tbeta \n gamma ");
    REQUIRE(words.size() == 3);
    CHECK(words[0].char_len == 5);
    CHECK(words[1].char_len == 4);
    auto tokens = word_tokens("a  b\tc");
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0] == "a");
    CHECK(tokens[2] == "c");
    CHECK(split_words("   ").empty());
}

TEST_CASE("iso8601 formatting") {
    CHECK(iso8601_utc(0.0) == "1970-01-01T00:00:00.000Z");
    std::int64_t t = epoch_from_civil(2026, 1, 15, 12, 30, 5);
    CHECK(iso8601_utc(double(t) + 0.25) == "2026-01-15T12:30:05.250Z");
    CHECK(utc_hour_bucket(double(t)) == t / 3600);
}

TEST_CASE("rng bounded draws are in range and deterministic") {
    rng::Engine a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        auto x = rng::bounded(a, 6);
        CHECK(x < 6);
        CHECK(x == rng::bounded(b, 6));
    }
    CHECK(rng::derive_seed(1, "s1") != rng::derive_seed(1, "s2"));
    CHECK(rng::derive_seed(1, "s1") != rng::derive_seed(2, "s1"));
    CHECK(rng::derive_seed(1, "s1") == rng::derive_seed(1, "s1"));
}

TEST_CASE("deterministic normal has sane moments") {
    rng::Engine eng(7);
    double sum = 0, ss = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double z = rng::standard_normal(eng);
        sum += z;
        ss += z * z;
    }
    double mean = sum / n;
    double var = ss / n - mean * mean;
    CHECK(std::fabs(mean) < 0.02);
    CHECK(std::fabs(var - 1.0) < 0.03);
}
