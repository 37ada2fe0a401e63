#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include <sys/socket.h>

#include "httplib.h"
#include "l2l/cli.hpp"
#include "l2l/http_api.hpp"
#include "l2l/http_fetcher.hpp"
#include "l2l/session_service.hpp"

namespace l2l::cli {

struct ServeOptions {
    std::string host = "0.0.0.0";
    std::optional<std::filesystem::path> assets_dir;
    std::chrono::milliseconds fetch_timeout{30'000};
    // Called once the socket is bound, before requests are served. The
    // callee may keep the reference and call stop() from another thread.
    std::function<void(httplib::Server&)> on_listening;
};

// Serves the session API until the server is stopped. Prints
// `listening on http://<host>:<port>` once bound.
inline int cmd_serve(const CliConfig& config, const ServeOptions& opts, std::ostream& out, std::ostream& diag) {
    if (const auto problem = config.validate(); !problem.empty()) {
        diag << "error: " << problem << '\n';
        return startup_error;
    }

    std::unique_ptr<SessionService> service;
    try {
        std::filesystem::create_directories(config.data_dir);
        ServiceConfig sc;
        sc.analysis = config.analysis;
        service = std::make_unique<SessionService>(
            config.data_dir, std::make_shared<HttpFetcher>(HttpFetcher::Options{opts.fetch_timeout}),
            std::make_shared<OutboxNotifier>(config.data_dir / "outbox.jsonl"), std::move(sc));
    } catch (const std::exception& e) {
        diag << "error: cannot open data directory " << config.data_dir.string() << ": " << e.what() << '\n';
        return startup_error;
    }
    for (const auto& w : service->store().load_warnings()) diag << "warning: skipped session file " << w << '\n';

    httplib::Server server;
    // SO_REUSEADDR only: with SO_REUSEPORT a second server could bind an
    // occupied port.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    mount_api(server, *service, opts.assets_dir);

    int port = config.port;
    if (port == 0) {
        port = server.bind_to_any_port(opts.host);
        if (port < 0) port = 0;
    } else if (!server.bind_to_port(opts.host, port)) {
        port = 0;
    }
    if (port <= 0) {
        diag << "error: cannot listen on " << opts.host << ":" << config.port << '\n';
        return startup_error;
    }
    out << "listening on http://" << opts.host << ":" << port << std::endl;

    if (opts.on_listening) opts.on_listening(server);
    server.listen_after_bind();
    return ok;
}

} // namespace l2l::cli
