#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace l2l {

// Milliseconds from session start. Never negative.
struct Timestamp {
    std::int64_t ms = 0;

    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::int64_t v) : ms(v) {}

    friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
};

namespace detail {

constexpr bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

constexpr std::int64_t to_int(std::string_view s) {
    std::int64_t v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

} // namespace detail

// Accepts `HH:MM:SS.mmm` (hours may have more than two digits) and the short
// `MM:SS.mmm` form. Minutes and seconds must be two digits in 00..59, the
// fraction exactly three digits.
constexpr std::optional<Timestamp> parse_timestamp(std::string_view s) {
    const auto dot = s.rfind('.');
    if (dot == std::string_view::npos) return std::nullopt;
    const auto frac = s.substr(dot + 1);
    if (frac.size() != 3 || !detail::all_digits(frac)) return std::nullopt;

    const auto clock = s.substr(0, dot);
    const auto c2 = clock.rfind(':');
    if (c2 == std::string_view::npos) return std::nullopt;
    const auto secs = clock.substr(c2 + 1);
    const auto head = clock.substr(0, c2);

    std::string_view hours, mins;
    if (const auto c1 = head.rfind(':'); c1 == std::string_view::npos) {
        mins = head;
    } else {
        hours = head.substr(0, c1);
        mins = head.substr(c1 + 1);
        if (hours.size() < 2 || hours.size() > 9 || !detail::all_digits(hours)) return std::nullopt;
    }
    if (mins.size() != 2 || !detail::all_digits(mins)) return std::nullopt;
    if (secs.size() != 2 || !detail::all_digits(secs)) return std::nullopt;

    const auto m = detail::to_int(mins);
    const auto sec = detail::to_int(secs);
    if (m > 59 || sec > 59) return std::nullopt;
    const auto h = hours.empty() ? 0 : detail::to_int(hours);
    return Timestamp{((h * 60 + m) * 60 + sec) * 1000 + detail::to_int(frac)};
}

// Always emits the long form, e.g. `01:02:03.004`.
inline std::string format_timestamp(Timestamp t) {
    const auto ms = t.ms < 0 ? 0 : t.ms;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld.%03lld",
                  static_cast<long long>(ms / 3'600'000),
                  static_cast<long long>(ms / 60'000 % 60),
                  static_cast<long long>(ms / 1000 % 60),
                  static_cast<long long>(ms % 1000));
    return buf;
}

} // namespace l2l
