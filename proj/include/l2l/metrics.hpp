#pragma once

// Conversation metrics computed from transcript timing alone: utterances,
// turns, talk time, conversation flow and conversational volatility. No
// function here reads cue or utterance text except to carry it through to
// the timeline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "l2l/timestamp.hpp"
#include "l2l/vtt.hpp"

namespace l2l {

inline constexpr std::size_t palette_size = 8;
inline constexpr std::string_view unattributed_speaker = "unattributed";

using SpeakerId = std::uint32_t;

struct Speaker {
    SpeakerId id = 0;
    std::string name;
    std::uint32_t color_index = 0;

    friend bool operator==(const Speaker&, const Speaker&) = default;
};

struct Utterance {
    SpeakerId speaker = 0;
    Timestamp start;
    Timestamp end;
    std::string text;

    std::int64_t duration_ms() const { return end.ms - start.ms; }
    friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Turn {
    SpeakerId speaker = 0;
    Timestamp start;
    Timestamp end;
    std::uint32_t utterance_count = 0;

    std::int64_t duration_ms() const { return end.ms - start.ms; }
    friend bool operator==(const Turn&, const Turn&) = default;
};

// Dense row-major matrix.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

// weights(a, b): milliseconds of a's speech handed over to b.
struct FlowMatrix {
    Matrix<std::int64_t> weights;

    std::int64_t row_sum(std::size_t a) const {
        std::int64_t s = 0;
        for (auto w : weights.row(a)) s += w;
        return s;
    }
    friend bool operator==(const FlowMatrix&, const FlowMatrix&) = default;
};

struct VolatilitySeries {
    std::int64_t window_ms = 0;
    double epsilon = 0.0;
    Matrix<double> shares;  // speakers x windows
    Matrix<double> returns; // speakers x (windows - 1)
    std::vector<double> per_speaker;
    double session = 0.0;

    friend bool operator==(const VolatilitySeries&, const VolatilitySeries&) = default;
};

struct MetricsReport {
    std::int64_t session_duration_ms = 0;
    std::vector<Speaker> speakers;
    std::vector<Utterance> utterances;
    std::vector<Turn> turns;
    std::vector<std::int64_t> talk_time_ms;
    std::vector<double> talk_share;
    FlowMatrix flow;
    VolatilitySeries volatility;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

struct AnalysisConfig {
    std::int64_t merge_gap_ms = 1000;
    std::int64_t window_ms = 60000;
    double epsilon = 0.01;
};

enum class MetricsErrc { invalid_window, invalid_epsilon, invalid_merge_gap };

class MetricsError : public std::invalid_argument {
public:
    MetricsError(MetricsErrc code, const std::string& what) : std::invalid_argument(what), code_(code) {}
    MetricsErrc code() const noexcept { return code_; }

private:
    MetricsErrc code_;
};

struct UtteranceExtraction {
    std::vector<Speaker> speakers;
    std::vector<Utterance> utterances;
};

// Cues must be sorted by start. An unlabelled cue belongs to whoever spoke the
// cue before it; a leading unlabelled cue goes to the reserved "unattributed"
// speaker. Consecutive cues of one speaker merge when the silence between them
// is at most merge_gap_ms.
inline UtteranceExtraction extract_utterances(std::span<const Cue> cues, std::int64_t merge_gap_ms) {
    if (merge_gap_ms < 0) throw MetricsError(MetricsErrc::invalid_merge_gap, "merge gap must be >= 0");

    UtteranceExtraction out;
    std::map<std::string, SpeakerId, std::less<>> ids;
    auto speaker_for = [&](std::string_view name) {
        if (auto it = ids.find(name); it != ids.end()) return it->second;
        const auto id = static_cast<SpeakerId>(out.speakers.size());
        ids.emplace(std::string(name), id);
        out.speakers.push_back({id, std::string(name), static_cast<std::uint32_t>(id % palette_size)});
        return id;
    };

    std::optional<SpeakerId> previous;
    for (const auto& cue : cues) {
        const auto speaker = cue.speaker_label ? speaker_for(*cue.speaker_label)
                             : previous       ? *previous
                                              : speaker_for(unattributed_speaker);
        previous = speaker;

        if (!out.utterances.empty()) {
            auto& last = out.utterances.back();
            if (last.speaker == speaker && cue.start.ms - last.end.ms <= merge_gap_ms) {
                last.end = std::max(last.end, cue.end);
                if (!cue.text.empty()) {
                    if (!last.text.empty()) last.text += ' ';
                    last.text += cue.text;
                }
                continue;
            }
        }
        out.utterances.push_back({speaker, cue.start, cue.end, cue.text});
    }
    return out;
}

inline std::vector<Turn> collapse_turns(std::span<const Utterance> utterances) {
    std::vector<Turn> turns;
    for (const auto& u : utterances) {
        if (!turns.empty() && turns.back().speaker == u.speaker) {
            auto& t = turns.back();
            t.end = u.end;
            ++t.utterance_count;
        } else {
            turns.push_back({u.speaker, u.start, u.end, 1});
        }
    }
    return turns;
}

struct TalkTime {
    std::vector<std::int64_t> ms;
    std::vector<double> share;
};

// Shares are fractions of total speaking time, not of wall-clock time.
inline TalkTime talk_time(std::span<const Utterance> utterances, std::size_t speaker_count) {
    TalkTime out{std::vector<std::int64_t>(speaker_count, 0), std::vector<double>(speaker_count, 0.0)};
    std::int64_t total = 0;
    for (const auto& u : utterances) {
        out.ms.at(u.speaker) += u.duration_ms();
        total += u.duration_ms();
    }
    if (total > 0)
        for (std::size_t i = 0; i < speaker_count; ++i)
            out.share[i] = static_cast<double>(out.ms[i]) / static_cast<double>(total);
    return out;
}

// Each turn's full duration is attributed to the speaker of the next turn.
inline FlowMatrix flow_matrix(std::span<const Turn> turns, std::size_t speaker_count) {
    FlowMatrix flow{Matrix<std::int64_t>(speaker_count, speaker_count)};
    for (std::size_t j = 0; j + 1 < turns.size(); ++j) {
        const auto a = turns[j].speaker;
        const auto b = turns[j + 1].speaker;
        if (a != b) flow.weights(a, b) += turns[j].duration_ms();
    }
    return flow;
}

struct Window {
    std::int64_t start = 0;
    std::int64_t end = 0;

    std::int64_t length() const { return end - start; }
    friend bool operator==(const Window&, const Window&) = default;
};

// Partition of [origin, origin + duration) into windows of window_ms. A final
// partial window of at least half a window stands alone; a shorter tail is
// folded into the window before it.
inline std::vector<Window> volatility_windows(std::int64_t duration_ms, std::int64_t window_ms,
                                              std::int64_t origin_ms = 0) {
    if (window_ms <= 0) throw MetricsError(MetricsErrc::invalid_window, "window_ms must be > 0");
    std::vector<Window> out;
    if (duration_ms <= 0) return out;

    const auto full = duration_ms / window_ms;
    const auto tail = duration_ms % window_ms;
    if (full == 0) {
        out.push_back({origin_ms, origin_ms + duration_ms});
        return out;
    }
    for (std::int64_t k = 0; k < full; ++k)
        out.push_back({origin_ms + k * window_ms, origin_ms + (k + 1) * window_ms});
    if (tail * 2 >= window_ms)
        out.push_back({out.back().end, origin_ms + duration_ms});
    else
        out.back().end += tail;
    return out;
}

namespace detail {

inline double population_stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

// Union of one speaker's intervals, sorted and non-overlapping.
inline std::vector<Window> speech_union(std::span<const Utterance> utterances, SpeakerId speaker) {
    std::vector<Window> spans;
    for (const auto& u : utterances)
        if (u.speaker == speaker) spans.push_back({u.start.ms, u.end.ms});
    std::sort(spans.begin(), spans.end(), [](const Window& a, const Window& b) { return a.start < b.start; });
    std::vector<Window> merged;
    for (const auto& s : spans) {
        if (!merged.empty() && s.start <= merged.back().end)
            merged.back().end = std::max(merged.back().end, s.end);
        else
            merged.push_back(s);
    }
    return merged;
}

} // namespace detail

// Volatility of speaking shares, transplanted from share-price volatility:
// per-window speaking fractions, additively smoothed log-returns between
// consecutive windows, population standard deviation per speaker, averaged
// over speakers for the session figure. Windows start at origin_ms.
inline VolatilitySeries volatility(std::span<const Utterance> utterances, std::size_t speaker_count,
                                   std::int64_t session_duration_ms, std::int64_t window_ms, double epsilon,
                                   std::int64_t origin_ms = 0) {
    if (window_ms <= 0) throw MetricsError(MetricsErrc::invalid_window, "window_ms must be > 0");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw MetricsError(MetricsErrc::invalid_epsilon, "epsilon must be > 0");

    const auto windows = volatility_windows(session_duration_ms, window_ms, origin_ms);
    const auto n = windows.size();

    VolatilitySeries v;
    v.window_ms = window_ms;
    v.epsilon = epsilon;
    v.shares = Matrix<double>(speaker_count, n);
    v.returns = Matrix<double>(speaker_count, n > 0 ? n - 1 : 0);
    v.per_speaker.assign(speaker_count, 0.0);

    for (std::size_t i = 0; i < speaker_count; ++i) {
        const auto speech = detail::speech_union(utterances, static_cast<SpeakerId>(i));
        std::size_t k = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const auto& w = windows[t];
            while (k < speech.size() && speech[k].end <= w.start) ++k;
            std::int64_t covered = 0;
            for (auto j = k; j < speech.size() && speech[j].start < w.end; ++j)
                covered += std::min(speech[j].end, w.end) - std::max(speech[j].start, w.start);
            v.shares(i, t) = static_cast<double>(covered) / static_cast<double>(w.length());
        }
        for (std::size_t t = 0; t + 1 < n; ++t)
            v.returns(i, t) = std::log((v.shares(i, t + 1) + epsilon) / (v.shares(i, t) + epsilon));
        v.per_speaker[i] = detail::population_stddev(v.returns.row(i));
    }

    if (speaker_count > 0) {
        double sum = 0.0;
        for (double x : v.per_speaker) sum += x;
        v.session = sum / static_cast<double>(speaker_count);
    }
    return v;
}

inline MetricsReport analyze(std::span<const Cue> cues, const AnalysisConfig& config = {}) {
    if (config.window_ms <= 0) throw MetricsError(MetricsErrc::invalid_window, "window_ms must be > 0");
    if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon))
        throw MetricsError(MetricsErrc::invalid_epsilon, "epsilon must be > 0");

    MetricsReport r;
    for (const auto& c : cues) r.session_duration_ms = std::max(r.session_duration_ms, c.end.ms);

    auto extraction = extract_utterances(cues, config.merge_gap_ms);
    r.speakers = std::move(extraction.speakers);
    r.utterances = std::move(extraction.utterances);
    r.turns = collapse_turns(r.utterances);

    const auto k = r.speakers.size();
    auto talk = talk_time(r.utterances, k);
    r.talk_time_ms = std::move(talk.ms);
    r.talk_share = std::move(talk.share);
    r.flow = flow_matrix(r.turns, k);
    r.volatility = volatility(r.utterances, k, r.session_duration_ms, config.window_ms, config.epsilon);
    return r;
}

} // namespace l2l
