#pragma once

// Session records for the review workflow: a group registers with their
// email addresses, receives a code, later submits the recording and
// transcript URLs, and the transcript is analysed into a MetricsReport.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "l2l/metrics.hpp"
#include "l2l/report_json.hpp"

namespace l2l {

enum class SessionStatus { registered, awaiting_analysis, analyzed, failed };

inline constexpr std::array all_statuses{SessionStatus::registered, SessionStatus::awaiting_analysis,
                                         SessionStatus::analyzed, SessionStatus::failed};

constexpr std::string_view to_string(SessionStatus s) {
    switch (s) {
    case SessionStatus::registered: return "registered";
    case SessionStatus::awaiting_analysis: return "awaiting_analysis";
    case SessionStatus::analyzed: return "analyzed";
    case SessionStatus::failed: return "failed";
    }
    return "unknown";
}

constexpr std::optional<SessionStatus> parse_status(std::string_view s) {
    for (auto st : all_statuses)
        if (to_string(st) == s) return st;
    return std::nullopt;
}

// registered -> awaiting_analysis -> {analyzed, failed}; failed -> awaiting_analysis.
constexpr bool is_legal_transition(SessionStatus from, SessionStatus to) {
    using enum SessionStatus;
    return (from == registered && to == awaiting_analysis) || (from == awaiting_analysis && to == analyzed) ||
           (from == awaiting_analysis && to == failed) || (from == failed && to == awaiting_analysis);
}

enum class SessionErrc {
    invalid_email,
    no_participants,
    too_many_participants,
    code_collision_exhausted,
    unknown_code,
    invalid_url,
    wrong_state,
    not_ready,
    queue_full,
};

constexpr std::string_view to_string(SessionErrc e) {
    switch (e) {
    case SessionErrc::invalid_email: return "InvalidEmail";
    case SessionErrc::no_participants: return "NoParticipants";
    case SessionErrc::too_many_participants: return "TooManyParticipants";
    case SessionErrc::code_collision_exhausted: return "CodeCollisionExhausted";
    case SessionErrc::unknown_code: return "UnknownCode";
    case SessionErrc::invalid_url: return "InvalidUrl";
    case SessionErrc::wrong_state: return "WrongState";
    case SessionErrc::not_ready: return "NotReady";
    case SessionErrc::queue_full: return "QueueFull";
    }
    return "Unknown";
}

class SessionError : public std::runtime_error {
public:
    SessionError(SessionErrc code, const std::string& what, std::optional<SessionStatus> status = std::nullopt)
        : std::runtime_error(what), code_(code), status_(status) {}

    SessionErrc code() const noexcept { return code_; }
    // Current status for WrongState / NotReady.
    std::optional<SessionStatus> status() const noexcept { return status_; }

private:
    SessionErrc code_;
    std::optional<SessionStatus> status_;
};

class SessionCode {
public:
    static constexpr std::string_view alphabet = "ABCDEFGHJKMNPQRSTUVWXYZ23456789";
    static constexpr std::size_t length = 8;

    static constexpr bool is_valid(std::string_view s) {
        return s.size() == length &&
               std::all_of(s.begin(), s.end(), [](char c) { return alphabet.find(c) != std::string_view::npos; });
    }

    static std::optional<SessionCode> parse(std::string_view s) {
        if (!is_valid(s)) return std::nullopt;
        return SessionCode(std::string(s));
    }

    const std::string& str() const { return value_; }

    friend auto operator<=>(const SessionCode&, const SessionCode&) = default;

private:
    explicit SessionCode(std::string v) : value_(std::move(v)) {}
    std::string value_;
};

// Uniform draws over the code alphabet. Seeded instances are reproducible.
class CodeGenerator {
public:
    CodeGenerator() : engine_(std::random_device{}()) {}
    explicit CodeGenerator(std::uint64_t seed) : engine_(seed) {}

    SessionCode operator()() {
        std::uniform_int_distribution<std::size_t> pick(0, SessionCode::alphabet.size() - 1);
        std::string s(SessionCode::length, ' ');
        for (auto& c : s) c = SessionCode::alphabet[pick(engine_)];
        return *SessionCode::parse(s);
    }

private:
    std::mt19937_64 engine_;
};

using CodeSource = std::function<SessionCode()>;
using Clock = std::chrono::system_clock;

inline constexpr std::size_t max_participants = 8;

namespace detail {

constexpr bool is_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

constexpr bool is_hostname(std::string_view host) {
    if (host.empty() || host.size() > 253) return false;
    std::size_t start = 0;
    while (true) {
        const auto dot = host.find('.', start);
        const auto label = host.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        if (label.empty() || label.size() > 63 || label.front() == '-' || label.back() == '-') return false;
        for (char c : label)
            if (!is_alnum(c) && c != '-') return false;
        if (dot == std::string_view::npos) return true;
        start = dot + 1;
    }
}

} // namespace detail

// local@domain: one '@', non-empty local part of printable non-special
// characters, domain of dot-separated hostname labels.
constexpr bool is_valid_email(std::string_view s) {
    const auto at = s.find('@');
    if (at == std::string_view::npos || s.find('@', at + 1) != std::string_view::npos) return false;
    const auto local = s.substr(0, at);
    const auto domain = s.substr(at + 1);
    if (local.empty() || local.size() > 64) return false;
    if (local.front() == '.' || local.back() == '.' || local.find("..") != std::string_view::npos) return false;
    for (char c : local) {
        const auto u = static_cast<unsigned char>(c);
        if (u <= 0x20 || u >= 0x7F) return false;
        if (std::string_view("()<>[]\\,;:\"").find(c) != std::string_view::npos) return false;
    }
    return detail::is_hostname(domain);
}

// Absolute http(s) URL with a host; no whitespace or control characters.
constexpr bool is_valid_url(std::string_view s) {
    if (s.size() > 4096) return false;
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (u <= 0x20 || u == 0x7F) return false;
    }
    std::string_view rest;
    auto has_scheme = [&](std::string_view scheme) {
        if (s.size() < scheme.size()) return false;
        for (std::size_t i = 0; i < scheme.size(); ++i) {
            char c = s[i];
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            if (c != scheme[i]) return false;
        }
        rest = s.substr(scheme.size());
        return true;
    };
    if (!has_scheme("https://") && !has_scheme("http://")) return false;
    const auto authority = rest.substr(0, rest.find_first_of("/?#"));
    if (authority.find('@') != std::string_view::npos) return false;
    auto host = authority;
    if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        const auto port = authority.substr(colon + 1);
        if (port.empty() || port.size() > 5 || !detail::all_digits(port) || detail::to_int(port) > 65535) return false;
        host = authority.substr(0, colon);
    }
    return detail::is_hostname(host);
}

struct Session {
    SessionCode code;
    std::vector<std::string> participant_emails;
    Clock::time_point created_at;
    std::optional<std::string> video_url;
    std::optional<std::string> transcript_url;
    SessionStatus status = SessionStatus::registered;
    std::optional<MetricsReport> report;
    std::optional<std::string> failure_reason;

    // Status/report/URL consistency rules every stored record satisfies.
    bool consistent() const {
        const bool has_urls = video_url.has_value() && transcript_url.has_value();
        const bool any_url = video_url.has_value() || transcript_url.has_value();
        const bool needs_urls = status != SessionStatus::registered;
        return (status == SessionStatus::analyzed) == report.has_value() &&
               (status == SessionStatus::failed) == failure_reason.has_value() &&
               (needs_urls ? has_urls : !any_url) && !participant_emails.empty() &&
               participant_emails.size() <= max_participants;
    }
};

struct SessionSummary {
    SessionCode code;
    SessionStatus status;
    Clock::time_point created_at;
    std::size_t participant_count;
};

inline SessionSummary summarize(const Session& s) {
    return {s.code, s.status, s.created_at, s.participant_emails.size()};
}

inline std::int64_t to_epoch_ms(Clock::time_point t) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

inline Clock::time_point from_epoch_ms(std::int64_t ms) {
    return Clock::time_point(std::chrono::duration_cast<Clock::duration>(std::chrono::milliseconds(ms)));
}

// ISO-8601 UTC with milliseconds, e.g. 2021-03-15T14:02:07.123Z.
inline std::string format_utc(Clock::time_point t) {
    const auto ms = to_epoch_ms(t);
    const std::time_t secs = static_cast<std::time_t>(ms >= 0 ? ms / 1000 : (ms - 999) / 1000);
    std::tm tm{};
    ::gmtime_r(&secs, &tm);
    char buf[40];
    const auto n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    std::snprintf(buf + n, sizeof buf - n, ".%03dZ", static_cast<int>(((ms % 1000) + 1000) % 1000));
    return buf;
}

inline json to_json(const SessionSummary& s) {
    return {{"code", s.code.str()},
            {"status", to_string(s.status)},
            {"created_at", format_utc(s.created_at)},
            {"participant_count", s.participant_count}};
}

// On-disk document for one session.
inline json to_json(const Session& s) {
    json j = {{"code", s.code.str()},
              {"participant_emails", s.participant_emails},
              {"created_at_ms", to_epoch_ms(s.created_at)},
              {"created_at", format_utc(s.created_at)},
              {"status", to_string(s.status)}};
    j["video_url"] = s.video_url ? json(*s.video_url) : json(nullptr);
    j["transcript_url"] = s.transcript_url ? json(*s.transcript_url) : json(nullptr);
    j["failure_reason"] = s.failure_reason ? json(*s.failure_reason) : json(nullptr);
    j["report"] = s.report ? to_json(*s.report) : json(nullptr);
    return j;
}

inline Session session_from_json(const json& j) {
    auto code = SessionCode::parse(j.at("code").get<std::string>());
    if (!code) throw std::invalid_argument("session document has an invalid code");
    auto status = parse_status(j.at("status").get<std::string>());
    if (!status) throw std::invalid_argument("session document has an invalid status");

    auto optional_string = [&](const char* key) -> std::optional<std::string> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        return j.at(key).get<std::string>();
    };
    Session s{*code, j.at("participant_emails").get<std::vector<std::string>>(),
              from_epoch_ms(j.at("created_at_ms").get<std::int64_t>()), optional_string("video_url"),
              optional_string("transcript_url"), *status, std::nullopt, optional_string("failure_reason")};
    if (j.contains("report") && !j.at("report").is_null()) s.report = report_from_json(j.at("report"));
    if (!s.consistent()) throw std::invalid_argument("session document violates status invariants");
    return s;
}

} // namespace l2l
