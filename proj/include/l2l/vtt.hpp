#pragma once

// Reader for WebVTT transcripts as exported by Zoom cloud recording, where
// each cue payload is prefixed with the speaker's display name:
//
//   WEBVTT
//
//   1
//   00:00:01.000 --> 00:00:03.500
//   Alice: hello there
//
// Only timing and the speaker prefix are interpreted. Cue text is passed
// through untouched apart from removing that prefix.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "l2l/timestamp.hpp"

namespace l2l {

enum class ParseMode { strict, lenient };

enum class VttErrc {
    missing_header,
    malformed_timestamp,
    inverted_cue,
    malformed_block,
    not_utf8,
};

constexpr std::string_view to_string(VttErrc e) {
    switch (e) {
    case VttErrc::missing_header: return "MissingHeader";
    case VttErrc::malformed_timestamp: return "MalformedTimestamp";
    case VttErrc::inverted_cue: return "InvertedCue";
    case VttErrc::malformed_block: return "MalformedBlock";
    case VttErrc::not_utf8: return "NotUtf8";
    }
    return "Unknown";
}

class VttError : public std::runtime_error {
public:
    VttError(VttErrc code, std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + std::string(to_string(code)) +
                             ": " + what),
          code_(code), line_(line) {}

    VttErrc code() const noexcept { return code_; }
    std::size_t line() const noexcept { return line_; }

private:
    VttErrc code_;
    std::size_t line_;
};

struct Cue {
    std::optional<std::uint32_t> index;
    Timestamp start;
    Timestamp end;
    std::optional<std::string> speaker_label;
    std::string text;

    friend bool operator==(const Cue&, const Cue&) = default;
};

struct ParseWarning {
    std::size_t line = 0;
    std::string message;

    friend bool operator==(const ParseWarning&, const ParseWarning&) = default;
};

struct ParseDiagnostics {
    std::vector<ParseWarning> warnings;
    std::size_t cues_dropped = 0;

    bool empty() const { return warnings.empty() && cues_dropped == 0; }
    friend bool operator==(const ParseDiagnostics&, const ParseDiagnostics&) = default;
};

struct ParseResult {
    std::vector<Cue> cues;
    ParseDiagnostics diagnostics;
};

// How a speaker name is recognised at the head of a payload. Zoom writes
// `Display Name: text`; the length bound keeps ordinary sentences that happen
// to contain ": " from being read as a name.
struct SpeakerPrefixRule {
    std::string_view separator = ": ";
    std::size_t max_name_chars = 64;
};

struct SplitPayload {
    std::optional<std::string> speaker_label;
    std::string text;

    friend bool operator==(const SplitPayload&, const SplitPayload&) = default;
};

namespace detail {

constexpr bool is_space(char c) { return c == ' ' || c == '\t'; }

constexpr std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

constexpr bool is_blank(std::string_view s) { return trim(s).empty(); }

inline std::size_t utf8_length(std::string_view s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

// Offset of the first byte that breaks UTF-8 well-formedness, if any.
// Rejects overlongs, surrogates and code points above U+10FFFF.
inline std::optional<std::size_t> find_invalid_utf8(std::string_view s) {
    std::size_t i = 0;
    const auto n = s.size();
    auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    auto cont = [&](std::size_t k) { return k < n && (byte(k) & 0xC0) == 0x80; };
    while (i < n) {
        const auto b = byte(i);
        if (b < 0x80) {
            ++i;
        } else if (b >= 0xC2 && b <= 0xDF) {
            if (!cont(i + 1)) return i;
            i += 2;
        } else if (b >= 0xE0 && b <= 0xEF) {
            if (!cont(i + 1) || !cont(i + 2)) return i;
            const auto b1 = byte(i + 1);
            if (b == 0xE0 && b1 < 0xA0) return i;
            if (b == 0xED && b1 > 0x9F) return i;
            i += 3;
        } else if (b >= 0xF0 && b <= 0xF4) {
            if (!cont(i + 1) || !cont(i + 2) || !cont(i + 3)) return i;
            const auto b1 = byte(i + 1);
            if (b == 0xF0 && b1 < 0x90) return i;
            if (b == 0xF4 && b1 > 0x8F) return i;
            i += 4;
        } else {
            return i;
        }
    }
    return std::nullopt;
}

struct Line {
    std::size_t number;
    std::string_view text;
};

// Splits on LF, CRLF or lone CR.
inline std::vector<Line> split_lines(std::string_view s) {
    std::vector<Line> out;
    std::size_t number = 1;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\n' || s[i] == '\r') {
            out.push_back({number++, s.substr(start, i - start)});
            if (s[i] == '\r' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
            start = i + 1;
        }
    }
    if (start < s.size()) out.push_back({number, s.substr(start)});
    return out;
}

constexpr bool starts_with_keyword(std::string_view line, std::string_view kw) {
    return line.starts_with(kw) && (line.size() == kw.size() || is_space(line[kw.size()]));
}

inline std::optional<std::uint32_t> parse_cue_index(std::string_view s) {
    s = trim(s);
    if (s.empty() || s.size() > 9 || !all_digits(s)) return std::nullopt;
    const auto v = static_cast<std::uint32_t>(to_int(s));
    if (v == 0) return std::nullopt;
    return v;
}

} // namespace detail

// Total function. If the first payload line is `<name><separator><rest>` with
// a non-empty name of at most max_name_chars code points, returns the trimmed
// name and the rest joined with any further lines by single spaces. Otherwise
// the payload comes back unchanged with no label.
inline SplitPayload split_speaker_prefix(std::string_view payload, const SpeakerPrefixRule& rule = {}) {
    const auto eol = payload.find('\n');
    const auto first = payload.substr(0, eol);
    const auto sep = rule.separator.empty() ? std::string_view::npos : first.find(rule.separator);
    if (sep == std::string_view::npos) return {std::nullopt, std::string(payload)};

    const auto name = detail::trim(first.substr(0, sep));
    if (name.empty() || detail::utf8_length(name) > rule.max_name_chars)
        return {std::nullopt, std::string(payload)};

    std::string text(first.substr(sep + rule.separator.size()));
    if (eol != std::string_view::npos) {
        auto rest = payload.substr(eol + 1);
        while (!rest.empty()) {
            const auto next = rest.find('\n');
            text += ' ';
            text += rest.substr(0, next);
            if (next == std::string_view::npos) break;
            rest.remove_prefix(next + 1);
        }
    }
    return {std::string(name), std::move(text)};
}

struct ParseOptions {
    ParseMode mode = ParseMode::lenient;
    SpeakerPrefixRule speaker_rule{};
};

// Returns cues ordered by (start, end). Structural failures (missing header,
// invalid UTF-8) throw in either mode; malformed cue blocks throw in strict
// mode and are skipped with a warning in lenient mode.
inline ParseResult parse_vtt(std::string_view input, const ParseOptions& opts = {}) {
    using detail::Line;

    if (input.starts_with("\xEF\xBB\xBF")) input.remove_prefix(3);
    if (const auto bad = detail::find_invalid_utf8(input)) {
        const auto line = 1 + static_cast<std::size_t>(
                                  std::count(input.begin(), input.begin() + static_cast<std::ptrdiff_t>(*bad), '\n'));
        throw VttError(VttErrc::not_utf8, line, "invalid UTF-8 at byte offset " + std::to_string(*bad));
    }

    const auto lines = detail::split_lines(input);
    std::size_t i = 0;
    while (i < lines.size() && detail::is_blank(lines[i].text)) ++i;
    if (i == lines.size() || !detail::starts_with_keyword(lines[i].text, "WEBVTT"))
        throw VttError(VttErrc::missing_header, i < lines.size() ? lines[i].number : 1,
                       "first non-blank line is not WEBVTT");
    // Header text runs until the first blank line.
    while (i < lines.size() && !detail::is_blank(lines[i].text)) ++i;

    ParseResult result;
    auto reject = [&](VttErrc code, std::size_t line, const std::string& msg) {
        if (opts.mode == ParseMode::strict) throw VttError(code, line, msg);
        result.diagnostics.warnings.push_back({line, std::string(to_string(code)) + ": " + msg});
        ++result.diagnostics.cues_dropped;
    };

    std::vector<std::size_t> cue_lines;
    while (i < lines.size()) {
        if (detail::is_blank(lines[i].text)) {
            ++i;
            continue;
        }
        const auto begin = i;
        while (i < lines.size() && !detail::is_blank(lines[i].text)) ++i;
        const std::span<const Line> block(lines.data() + begin, i - begin);

        const auto has_arrow = [](const Line& l) { return l.text.find("-->") != std::string_view::npos; };
        std::size_t timing = 0;
        if (!has_arrow(block[0])) {
            const auto& head = block[0].text;
            if (detail::starts_with_keyword(head, "NOTE") || detail::starts_with_keyword(head, "STYLE") ||
                detail::starts_with_keyword(head, "REGION"))
                continue;
            if (block.size() < 2 || !has_arrow(block[1])) {
                reject(VttErrc::malformed_block, block[0].number, "block has no timing line");
                continue;
            }
            timing = 1;
        }

        const auto& timing_line = block[timing];
        const auto arrow = timing_line.text.find("-->");
        const auto start_text = detail::trim(timing_line.text.substr(0, arrow));
        auto after = detail::trim(timing_line.text.substr(arrow + 3));
        // Anything after the end timestamp is cue settings; ignored.
        const auto end_text = after.substr(0, std::min(after.find(' '), after.find('\t')));

        const auto start = parse_timestamp(start_text);
        const auto end = parse_timestamp(end_text);
        if (!start || !end) {
            reject(VttErrc::malformed_timestamp, timing_line.number,
                   "cannot parse timing '" + std::string(timing_line.text) + "'");
            continue;
        }
        if (*end <= *start) {
            reject(VttErrc::inverted_cue, timing_line.number, "cue end is not after its start");
            continue;
        }

        std::string payload;
        for (std::size_t k = timing + 1; k < block.size(); ++k) {
            if (k > timing + 1) payload += '\n';
            payload += block[k].text;
        }
        auto split = split_speaker_prefix(payload, opts.speaker_rule);

        Cue cue;
        if (timing == 1) cue.index = detail::parse_cue_index(block[0].text);
        cue.start = *start;
        cue.end = *end;
        cue.speaker_label = std::move(split.speaker_label);
        cue.text = std::move(split.text);
        result.cues.push_back(std::move(cue));
        cue_lines.push_back(timing_line.number);
    }

    auto by_time = [](const Cue& a, const Cue& b) {
        return a.start != b.start ? a.start < b.start : a.end < b.end;
    };
    if (const auto it = std::is_sorted_until(result.cues.begin(), result.cues.end(), by_time);
        it != result.cues.end()) {
        const auto pos = static_cast<std::size_t>(it - result.cues.begin());
        result.diagnostics.warnings.push_back({cue_lines[pos], "cues out of chronological order; sorted"});
        std::stable_sort(result.cues.begin(), result.cues.end(), by_time);
    }
    return result;
}

inline ParseResult parse_vtt(std::string_view input, ParseMode mode) {
    return parse_vtt(input, ParseOptions{mode, {}});
}

} // namespace l2l
