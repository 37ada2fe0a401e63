#pragma once

// MetricsReport wire format. Key names and nesting are consumed verbatim by
// the review dashboard and by the session API:
//
//   session_duration_ms
//   speakers[]    {id, name, color_index}
//   utterances[]  {speaker, start_ms, end_ms, text}
//   turns[]       {speaker, start_ms, end_ms, utterance_count}
//   talk_time_ms[], talk_share[]
//   flow[][]      flow[a][b] = ms of a's turns followed by a turn of b
//   volatility    {window_ms, epsilon, shares[][], returns[][], per_speaker[], session}
//
// Volatility is a reconstruction of the share-price measure applied to
// speaking time: shares[i][t] is speaker i's fraction of window t spent
// speaking, returns[i][t] = ln((shares[i][t+1] + epsilon) / (shares[i][t] + epsilon)),
// per_speaker[i] is the population standard deviation of returns[i] and
// session is the mean of per_speaker.

#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "l2l/metrics.hpp"

namespace l2l {

using json = nlohmann::json;

namespace detail {

template <class T>
json matrix_to_json(const Matrix<T>& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (const auto& v : m.row(r)) row.push_back(v);
        rows.push_back(std::move(row));
    }
    return rows;
}

template <class T>
Matrix<T> matrix_from_json(const json& j) {
    const auto rows = j.size();
    const auto cols = rows ? j.at(0).size() : 0;
    Matrix<T> m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = j.at(r);
        if (row.size() != cols) throw std::invalid_argument("ragged matrix in report JSON");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = row.at(c).get<T>();
    }
    return m;
}

} // namespace detail

inline json to_json(const MetricsReport& r) {
    json speakers = json::array();
    for (const auto& s : r.speakers)
        speakers.push_back({{"id", s.id}, {"name", s.name}, {"color_index", s.color_index}});

    json utterances = json::array();
    for (const auto& u : r.utterances)
        utterances.push_back(
            {{"speaker", u.speaker}, {"start_ms", u.start.ms}, {"end_ms", u.end.ms}, {"text", u.text}});

    json turns = json::array();
    for (const auto& t : r.turns)
        turns.push_back({{"speaker", t.speaker},
                         {"start_ms", t.start.ms},
                         {"end_ms", t.end.ms},
                         {"utterance_count", t.utterance_count}});

    const auto& v = r.volatility;
    json out = json::object();
    out["session_duration_ms"] = r.session_duration_ms;
    out["speakers"] = std::move(speakers);
    out["utterances"] = std::move(utterances);
    out["turns"] = std::move(turns);
    out["talk_time_ms"] = r.talk_time_ms;
    out["talk_share"] = r.talk_share;
    out["flow"] = detail::matrix_to_json(r.flow.weights);
    out["volatility"] = {{"window_ms", v.window_ms},
                         {"epsilon", v.epsilon},
                         {"shares", detail::matrix_to_json(v.shares)},
                         {"returns", detail::matrix_to_json(v.returns)},
                         {"per_speaker", v.per_speaker},
                         {"session", v.session}};
    return out;
}

inline MetricsReport report_from_json(const json& j) {
    MetricsReport r;
    r.session_duration_ms = j.at("session_duration_ms").get<std::int64_t>();
    for (const auto& s : j.at("speakers"))
        r.speakers.push_back({s.at("id").get<SpeakerId>(), s.at("name").get<std::string>(),
                              s.at("color_index").get<std::uint32_t>()});
    for (const auto& u : j.at("utterances"))
        r.utterances.push_back({u.at("speaker").get<SpeakerId>(), Timestamp{u.at("start_ms").get<std::int64_t>()},
                                Timestamp{u.at("end_ms").get<std::int64_t>()}, u.at("text").get<std::string>()});
    for (const auto& t : j.at("turns"))
        r.turns.push_back({t.at("speaker").get<SpeakerId>(), Timestamp{t.at("start_ms").get<std::int64_t>()},
                           Timestamp{t.at("end_ms").get<std::int64_t>()},
                           t.at("utterance_count").get<std::uint32_t>()});
    r.talk_time_ms = j.at("talk_time_ms").get<std::vector<std::int64_t>>();
    r.talk_share = j.at("talk_share").get<std::vector<double>>();
    r.flow.weights = detail::matrix_from_json<std::int64_t>(j.at("flow"));

    const auto& v = j.at("volatility");
    r.volatility.window_ms = v.at("window_ms").get<std::int64_t>();
    r.volatility.epsilon = v.at("epsilon").get<double>();
    r.volatility.shares = detail::matrix_from_json<double>(v.at("shares"));
    r.volatility.returns = detail::matrix_from_json<double>(v.at("returns"));
    r.volatility.per_speaker = v.at("per_speaker").get<std::vector<double>>();
    r.volatility.session = v.at("session").get<double>();
    return r;
}

// Pretty-printed with a trailing newline; the CLI output and golden files use
// exactly this form.
inline std::string report_to_json_text(const MetricsReport& r) { return to_json(r).dump(2) + "\n"; }

namespace detail {

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace detail

// Two tables separated by a blank line: per-speaker talk time, then the flow
// matrix with rows as the handing-over speaker and columns as the recipient.
inline std::string report_to_csv(const MetricsReport& r) {
    std::ostringstream os;
    os << "speaker,name,talk_time_ms,talk_share\n";
    for (const auto& s : r.speakers)
        os << s.id << ',' << detail::csv_field(s.name) << ',' << r.talk_time_ms.at(s.id) << ','
           << json(r.talk_share.at(s.id)).dump() << '\n';
    os << '\n';
    os << "from";
    for (const auto& s : r.speakers) os << ',' << detail::csv_field(s.name);
    os << '\n';
    for (const auto& s : r.speakers) {
        os << detail::csv_field(s.name);
        for (auto w : r.flow.weights.row(s.id)) os << ',' << w;
        os << '\n';
    }
    return os.str();
}

} // namespace l2l
