#pragma once

// HTTP/JSON surface of the session service:
//
//   POST /api/sessions                      {emails:[...]}                 -> 201 {code, status}
//   POST /api/sessions/{code}/recording     {video_url, transcript_url}   -> 202 {code, status}
//   GET  /api/sessions/{code}/report                                      -> 200 report | 404 | 409 {status}
//   GET  /api/sessions/{code}                                             -> 200 session view | 404
//   GET  /api/sessions?status=...                                         -> 200 [summaries]
//   GET  /api/healthz                                                     -> 200
//   GET  /review/{code}                     dashboard page (when assets are configured)
//
// Errors are {error_code, message}.

#include <filesystem>
#include <optional>
#include <string>

#include "httplib.h"
#include "l2l/atomic_file.hpp"
#include "l2l/session_service.hpp"

namespace l2l {

namespace detail {

struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    send_json(res, status, {{"error_code", code}, {"message", message}});
}

constexpr int http_status_for(SessionErrc e) {
    switch (e) {
    case SessionErrc::invalid_email:
    case SessionErrc::no_participants:
    case SessionErrc::too_many_participants:
    case SessionErrc::invalid_url: return 400;
    case SessionErrc::unknown_code: return 404;
    case SessionErrc::wrong_state:
    case SessionErrc::not_ready: return 409;
    case SessionErrc::queue_full: return 503;
    case SessionErrc::code_collision_exhausted: return 500;
    }
    return 500;
}

inline void send_session_error(httplib::Response& res, const SessionError& e) {
    json body = {{"error_code", to_string(e.code())}, {"message", e.what()}};
    if (e.status()) body["status"] = to_string(*e.status());
    send_json(res, http_status_for(e.code()), body);
}

// Runs a handler, translating the library's exceptions into JSON errors.
template <class F>
void guarded(httplib::Response& res, F&& fn) {
    try {
        fn();
    } catch (const SessionError& e) {
        send_session_error(res, e);
    } catch (const BadRequest& e) {
        send_error(res, 400, "BadRequest", e.what());
    } catch (const json::exception& e) {
        send_error(res, 400, "BadRequest", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "Internal", e.what());
    }
}

inline json parse_body(const httplib::Request& req) {
    auto body = json::parse(req.body);
    if (!body.is_object()) throw BadRequest("request body must be a JSON object");
    return body;
}

} // namespace detail

inline void mount_api(httplib::Server& server, SessionService& service,
                      std::optional<std::filesystem::path> assets_dir = std::nullopt) {
    using detail::guarded;
    using detail::send_error;
    using detail::send_json;

    server.Get("/api/healthz", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}});
    });

    server.Post("/api/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto body = detail::parse_body(req);
            const auto s = service.register_session(body.at("emails").get<std::vector<std::string>>());
            send_json(res, 201, {{"code", s.code.str()}, {"status", to_string(s.status)}});
        });
    });

    server.Get("/api/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            std::optional<SessionStatus> filter;
            if (req.has_param("status")) {
                const auto value = req.get_param_value("status");
                filter = parse_status(value);
                if (!filter) return send_error(res, 400, "InvalidStatus", "unknown status '" + value + "'");
            }
            json out = json::array();
            for (const auto& s : service.list_sessions(filter)) out.push_back(to_json(s));
            send_json(res, 200, out);
        });
    });

    server.Post(R"(/api/sessions/([^/]+)/recording)",
                [&service](const httplib::Request& req, httplib::Response& res) {
                    guarded(res, [&] {
                        const auto body = detail::parse_body(req);
                        const auto s = service.submit_recording(req.matches[1].str(),
                                                                body.at("video_url").get<std::string>(),
                                                                body.at("transcript_url").get<std::string>());
                        send_json(res, 202, {{"code", s.code.str()}, {"status", to_string(s.status)}});
                    });
                });

    server.Get(R"(/api/sessions/([^/]+)/report)", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, to_json(service.get_report(req.matches[1].str()))); });
    });

    // Session view for the dashboard: no participant emails, only what the
    // review page needs.
    server.Get(R"(/api/sessions/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto code = req.matches[1].str();
            const auto s = service.find(code);
            if (!s) return send_error(res, 404, "UnknownCode", "unknown session code " + code);
            auto view = to_json(summarize(*s));
            view["video_url"] = s->video_url ? json(*s->video_url) : json(nullptr);
            view["failure_reason"] = s->failure_reason ? json(*s->failure_reason) : json(nullptr);
            send_json(res, 200, view);
        });
    });

    if (assets_dir) {
        server.set_mount_point("/assets", assets_dir->string());
        server.Get(R"(/review/([^/]+))", [dir = *assets_dir](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                const auto index = dir / "index.html";
                if (!std::filesystem::exists(index))
                    return send_error(res, 404, "DashboardUnavailable", "dashboard assets not installed");
                res.set_content(read_file(index), "text/html");
            });
        });
    } else {
        server.Get(R"(/review/([^/]+))", [](const httplib::Request&, httplib::Response& res) {
            send_error(res, 404, "DashboardUnavailable", "dashboard assets not configured");
        });
    }
}

} // namespace l2l
