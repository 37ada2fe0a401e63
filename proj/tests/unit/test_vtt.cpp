#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>

#include "l2l/atomic_file.hpp"
#include "l2l/vtt.hpp"
#include "corpus.hpp"
#include "synth.hpp"

using namespace l2l;

namespace {

VttErrc error_of(std::string_view input, ParseMode mode) {
    try {
        parse_vtt(input, mode);
    } catch (const VttError& e) {
        return e.code();
    }
    FAIL("expected a VttError");
    return VttErrc::missing_header;
}

const std::string three_cues_bad_middle = "WEBVTT\n\n"
                                          "1\n00:00:01.000 --> 00:00:02.000\nAlice: one\n\n"
                                          "2\n00:00:xx.000 --> 00:00:04.000\nBob: two\n\n"
                                          "3\n00:00:05.000 --> 00:00:06.000\nAlice: three\n";

} // namespace

TEST_CASE("parse_vtt: single well-formed cue", "[vtt]") {
    const auto r = parse_vtt("WEBVTT\n\n1\n00:00:01.000 --> 00:00:03.500\nAlice: hello there\n", ParseMode::strict);
    REQUIRE(r.cues.size() == 1);
    const auto& c = r.cues[0];
    CHECK(c.index == 1u);
    CHECK(c.start == Timestamp{1000});
    CHECK(c.end == Timestamp{3500});
    CHECK(c.speaker_label == "Alice");
    CHECK(c.text == "hello there");
    CHECK(r.diagnostics.empty());
}

TEST_CASE("parse_vtt: missing header fails in both modes", "[vtt]") {
    const std::string input = "NOT-VTT\n\n1\n00:00:01.000 --> 00:00:02.000\nAlice: hi\n";
    CHECK(error_of(input, ParseMode::strict) == VttErrc::missing_header);
    CHECK(error_of(input, ParseMode::lenient) == VttErrc::missing_header);
    CHECK(error_of("", ParseMode::lenient) == VttErrc::missing_header);
    CHECK(error_of("WEBVTTX\n", ParseMode::lenient) == VttErrc::missing_header);
}

TEST_CASE("parse_vtt: malformed timestamp is fatal only in strict mode", "[vtt]") {
    try {
        parse_vtt(three_cues_bad_middle, ParseMode::strict);
        FAIL("strict parse should throw");
    } catch (const VttError& e) {
        CHECK(e.code() == VttErrc::malformed_timestamp);
        CHECK(e.line() == 8);
    }

    const auto r = parse_vtt(three_cues_bad_middle, ParseMode::lenient);
    REQUIRE(r.cues.size() == 2);
    CHECK(r.cues[0].text == "one");
    CHECK(r.cues[1].text == "three");
    CHECK(r.diagnostics.cues_dropped == 1);
    REQUIRE(r.diagnostics.warnings.size() == 1);
    CHECK(r.diagnostics.warnings[0].line == 8);
}

TEST_CASE("parse_vtt: inverted and empty cues", "[vtt]") {
    const std::string inverted = "WEBVTT\n\n00:00:05.000 --> 00:00:04.000\nBob: backwards\n";
    const std::string instant = "WEBVTT\n\n00:00:05.000 --> 00:00:05.000\nBob: instant\n";
    CHECK(error_of(inverted, ParseMode::strict) == VttErrc::inverted_cue);
    CHECK(error_of(instant, ParseMode::strict) == VttErrc::inverted_cue);
    const auto r = parse_vtt(instant, ParseMode::lenient);
    CHECK(r.cues.empty());
    CHECK(r.diagnostics.cues_dropped == 1);
}

TEST_CASE("parse_vtt: invalid UTF-8 fails in both modes", "[vtt]") {
    const std::string bad = "WEBVTT\n\n00:00:01.000 --> 00:00:02.000\nAlice: caf\xE9\n";
    CHECK(error_of(bad, ParseMode::strict) == VttErrc::not_utf8);
    CHECK(error_of(bad, ParseMode::lenient) == VttErrc::not_utf8);
    // Overlong encoding of '/' and a lone surrogate.
    CHECK(error_of("WEBVTT\n\xC0\xAF", ParseMode::lenient) == VttErrc::not_utf8);
    CHECK(error_of("WEBVTT\n\xED\xA0\x80", ParseMode::lenient) == VttErrc::not_utf8);
}

TEST_CASE("parse_vtt: BOM, CRLF and lone CR are accepted", "[vtt]") {
    const auto bom = parse_vtt("\xEF\xBB\xBFWEBVTT\n\n00:00:01.000 --> 00:00:02.000\nAlice: a\n", ParseMode::strict);
    CHECK(bom.cues.size() == 1);
    const auto crlf = parse_vtt("WEBVTT\r\n\r\n00:00:01.000 --> 00:00:02.000\r\nAlice: a\r\n", ParseMode::strict);
    REQUIRE(crlf.cues.size() == 1);
    CHECK(crlf.cues[0].text == "a");
    const auto cr = parse_vtt("WEBVTT\r\r00:00:01.000 --> 00:00:02.000\rAlice: a\r", ParseMode::strict);
    CHECK(cr.cues.size() == 1);
}

TEST_CASE("parse_vtt: cue settings are ignored", "[vtt]") {
    const auto r =
        parse_vtt("WEBVTT\n\n00:00:01.000 --> 00:00:02.000 align:start position:10%\nAlice: x\n", ParseMode::strict);
    REQUIRE(r.cues.size() == 1);
    CHECK(r.cues[0].end == Timestamp{2000});
}

TEST_CASE("parse_vtt: out-of-order cues are sorted with a warning", "[vtt]") {
    const auto r = parse_vtt("WEBVTT\n\n00:00:05.000 --> 00:00:06.000\nA: later\n\n"
                             "00:00:01.000 --> 00:00:02.000\nB: earlier\n",
                             ParseMode::strict);
    REQUIRE(r.cues.size() == 2);
    CHECK(r.cues[0].speaker_label == "B");
    CHECK(r.cues[1].speaker_label == "A");
    CHECK(r.diagnostics.warnings.size() == 1);
    CHECK(r.diagnostics.cues_dropped == 0);
}

TEST_CASE("parse_vtt: NOTE, STYLE and REGION blocks are skipped", "[vtt]") {
    const auto r = parse_vtt("WEBVTT\n\nNOTE hello\n\nSTYLE\n::cue {}\n\nREGION\nid:x\n\n"
                             "00:00:01.000 --> 00:00:02.000\nA: x\n",
                             ParseMode::strict);
    CHECK(r.cues.size() == 1);
    CHECK(r.diagnostics.empty());
}

TEST_CASE("parse_vtt: non-numeric cue identifiers leave index empty", "[vtt]") {
    const auto r = parse_vtt("WEBVTT\n\nintro\n00:00:01.000 --> 00:00:02.000\nA: x\n\n"
                             "0\n00:00:03.000 --> 00:00:04.000\nA: y\n",
                             ParseMode::strict);
    REQUIRE(r.cues.size() == 2);
    CHECK_FALSE(r.cues[0].index.has_value());
    CHECK_FALSE(r.cues[1].index.has_value());
}

TEST_CASE("parse_vtt: a one-hour synthetic Zoom transcript", "[vtt]") {
    std::mt19937_64 rng(2021);
    const auto session = testing::hour_long_session(rng, 1500, 4);
    const auto r = parse_vtt(testing::to_vtt(session.cues), ParseMode::strict);
    REQUIRE(r.cues.size() == 1500);
    CHECK(std::all_of(r.cues.begin(), r.cues.end(), [](const Cue& c) { return c.speaker_label.has_value(); }));
    std::vector<std::string> labels;
    for (const auto& c : r.cues)
        if (std::find(labels.begin(), labels.end(), *c.speaker_label) == labels.end())
            labels.push_back(*c.speaker_label);
    CHECK(labels.size() == 4);
    CHECK(r.cues == session.cues);
}

TEST_CASE("split_speaker_prefix", "[vtt]") {
    CHECK(split_speaker_prefix("Bob: ça va ?") == SplitPayload{"Bob", "ça va ?"});
    CHECK(split_speaker_prefix("no colon here") == SplitPayload{std::nullopt, "no colon here"});
    CHECK(split_speaker_prefix("Dr. A. Smith: yes\nindeed") == SplitPayload{"Dr. A. Smith", "yes indeed"});
    CHECK(split_speaker_prefix("  Alice  : padded") == SplitPayload{"Alice", "padded"});
    CHECK(split_speaker_prefix(": nameless") == SplitPayload{std::nullopt, ": nameless"});
    CHECK(split_speaker_prefix("time:10 no space") == SplitPayload{std::nullopt, "time:10 no space"});
    CHECK(split_speaker_prefix("") == SplitPayload{std::nullopt, ""});
    // Only the first line is searched for a name.
    CHECK(split_speaker_prefix("plain\nBob: later") == SplitPayload{std::nullopt, "plain\nBob: later"});
}

TEST_CASE("split_speaker_prefix: name length bound counts code points", "[vtt]") {
    const std::string ascii64(64, 'a');
    const std::string ascii65(65, 'a');
    CHECK(split_speaker_prefix(ascii64 + ": x").speaker_label == ascii64);
    CHECK_FALSE(split_speaker_prefix(ascii65 + ": x").speaker_label.has_value());

    std::string accented;
    for (int i = 0; i < 64; ++i) accented += "é"; // 128 bytes, 64 code points
    CHECK(split_speaker_prefix(accented + ": x").speaker_label == accented);
}

TEST_CASE("split_speaker_prefix: rule is configurable", "[vtt]") {
    const SpeakerPrefixRule dash{" - ", 10};
    CHECK(split_speaker_prefix("Ann - hi", dash) == SplitPayload{"Ann", "hi"});
    CHECK(split_speaker_prefix("Ann: hi", dash) == SplitPayload{std::nullopt, "Ann: hi"});
    const auto r = parse_vtt("WEBVTT\n\n00:00:01.000 --> 00:00:02.000\nAnn - hi\n", {ParseMode::strict, dash});
    CHECK(r.cues.at(0).speaker_label == "Ann");
}

TEST_CASE("parse_vtt: lenient result is a subsequence of strict, equal when clean", "[vtt][property]") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> coin(0, 9);
    for (int round = 0; round < 200; ++round) {
        const auto session = testing::random_session(rng);
        auto text = testing::to_vtt(session.cues);
        const auto strict = parse_vtt(text, ParseMode::strict);
        const auto lenient = parse_vtt(text, ParseMode::lenient);
        REQUIRE(lenient.diagnostics.empty());
        REQUIRE(lenient.cues == strict.cues);
        REQUIRE(strict.cues == session.cues);

        // Corrupt a timing line; lenient must drop exactly that cue.
        if (coin(rng) < 5) {
            const auto pos = text.find(" --> ", text.size() / 2);
            if (pos == std::string::npos) continue;
            text.replace(pos, 5, " -> ");
            CHECK_THROWS_AS(parse_vtt(text, ParseMode::strict), VttError);
            const auto damaged = parse_vtt(text, ParseMode::lenient);
            REQUIRE(damaged.diagnostics.cues_dropped == 1);
            REQUIRE(damaged.cues.size() + 1 == strict.cues.size());
            REQUIRE(std::includes(strict.cues.begin(), strict.cues.end(), damaged.cues.begin(), damaged.cues.end(),
                                  [](const Cue& a, const Cue& b) { return a.start < b.start; }));
        }
    }
}

TEST_CASE("parse_vtt is deterministic", "[vtt][property]") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 50; ++round) {
        const auto text = testing::to_vtt(testing::random_session(rng).cues);
        const auto a = parse_vtt(text);
        const auto b = parse_vtt(text);
        REQUIRE(a.cues == b.cues);
        REQUIRE(a.diagnostics == b.diagnostics);
    }
}

TEST_CASE("parse_vtt: fixture corpus files parse", "[vtt]") {
    const std::filesystem::path dir = L2L_TEST_DATA "/vtt";
    const auto r = parse_vtt(read_file(dir / "zoom_session.vtt"), ParseMode::strict);
    CHECK(r.cues.size() == 12);
    CHECK(r.cues.back().end == Timestamp{125'000});
}

TEST_CASE("parse_vtt: fixture corpus matches its manifest", "[vtt]") {
    const auto r = testing::check_corpus(L2L_TEST_DATA "/vtt");
    CHECK(r.files >= 20);
    for (const auto& f : r.failures) FAIL_CHECK(f);
}
