#include <catch_amalgamated.hpp>

#include <random>

#include "l2l/timestamp.hpp"

using l2l::format_timestamp;
using l2l::parse_timestamp;
using l2l::Timestamp;

TEST_CASE("parse_timestamp: long form", "[timestamp]") {
    CHECK(parse_timestamp("00:00:01.000") == Timestamp{1000});
    CHECK(parse_timestamp("01:02:03.004") == Timestamp{3'723'004});
    CHECK(parse_timestamp("100:00:00.000") == Timestamp{360'000'000});
}

TEST_CASE("parse_timestamp: short form", "[timestamp]") {
    CHECK(parse_timestamp("00:01.000") == Timestamp{1000});
    CHECK(parse_timestamp("59:59.999") == Timestamp{3'599'999});
}

TEST_CASE("parse_timestamp: rejects malformed input", "[timestamp]") {
    for (const char* bad : {"", "00:00:xx.000", "00:00:01,000", "00:00:01.00", "00:00:01.0000", "0:00:01.000",
                            "00:60:00.000", "00:00:60.000", "1.000", "00:1.000", "-00:00:01.000", " 00:00:01.000",
                            "00:00:01.", "00:00:01"})
        CHECK_FALSE(parse_timestamp(bad).has_value());
}

TEST_CASE("format_timestamp pads every field", "[timestamp]") {
    CHECK(format_timestamp(Timestamp{0}) == "00:00:00.000");
    CHECK(format_timestamp(Timestamp{3'723'004}) == "01:02:03.004");
    CHECK(format_timestamp(Timestamp{360'000'000}) == "100:00:00.000");
}

TEST_CASE("parse(format(t)) == t", "[timestamp][property]") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> ms(0, 400LL * 3'600'000);
    for (int i = 0; i < 2000; ++i) {
        const Timestamp t{ms(rng)};
        REQUIRE(parse_timestamp(format_timestamp(t)) == t);
    }
}
