#pragma once

#include <chrono>
#include <cstddef>
#include <string>

#include "httplib.h"
#include "l2l/session_service.hpp"

namespace l2l {

// Plain HTTP(S) GET with redirects followed, a per-operation timeout and a
// cap on the body size.
class HttpFetcher final : public TranscriptFetcher {
public:
    struct Options {
        std::chrono::milliseconds timeout{30'000};
        std::size_t max_bytes = 20u * 1024 * 1024;
    };

    HttpFetcher() = default;
    explicit HttpFetcher(Options opts) : opts_(opts) {}

    std::string fetch(const std::string& url) override {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw FetchError(FetchError::Kind::transport, "not an absolute URL");
        const auto path_start = url.find_first_of("/?#", scheme_end + 3);
        const auto origin = url.substr(0, path_start);
        auto target = path_start == std::string::npos ? std::string("/") : url.substr(path_start);
        if (const auto hash = target.find('#'); hash != std::string::npos) target.erase(hash);
        if (target.empty() || target.front() != '/') target.insert(0, "/");

        httplib::Client client(origin);
        if (!client.is_valid()) throw FetchError(FetchError::Kind::transport, "unsupported URL " + origin);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(opts_.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opts_.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        client.set_follow_location(true);

        std::string body;
        bool too_large = false;
        auto res = client.Get(target, [&](const char* data, std::size_t len) {
            if (body.size() + len > opts_.max_bytes) {
                too_large = true;
                return false;
            }
            body.append(data, len);
            return true;
        });
        if (too_large)
            throw FetchError(FetchError::Kind::too_large,
                             "transcript exceeds " + std::to_string(opts_.max_bytes) + " bytes");
        if (!res) {
            const auto err = res.error();
            const auto kind = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout
                                  ? FetchError::Kind::timeout
                                  : FetchError::Kind::transport;
            throw FetchError(kind, "GET " + url + ": " + httplib::to_string(err));
        }
        if (res->status < 200 || res->status >= 300)
            throw FetchError(FetchError::Kind::http_status, "GET " + url + ": HTTP " + std::to_string(res->status),
                             res->status);
        return body;
    }

private:
    Options opts_{};
};

} // namespace l2l
