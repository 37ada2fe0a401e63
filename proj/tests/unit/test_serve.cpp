#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include <sys/socket.h>

#include "httplib.h"
#include "json.hpp"
#include "subprocess.hpp"
#include "temp_dir.hpp"

using l2l::testing::Child;
using l2l::testing::listening_port;
using l2l::testing::TempDir;
namespace fs = std::filesystem;

namespace {

const std::string cli = L2L_CLI_PATH;

int wait_for_port(Child& c) {
    const auto line = c.read_line();
    REQUIRE(line.has_value());
    const int port = listening_port(*line);
    REQUIRE(port > 0);
    return port;
}

} // namespace

TEST_CASE("serve --port 0 answers the health check and stops on SIGTERM", "[serve]") {
    TempDir dir;
    Child server({cli, "serve", "--port", "0", "--data-dir", (dir / "data").string()});
    const int port = wait_for_port(server);

    httplib::Client client("127.0.0.1", port);
    auto r = client.Get("/api/healthz");
    REQUIRE(r);
    CHECK(r->status == 200);

    server.signal(SIGTERM);
    CHECK(server.wait() == 0);
}

TEST_CASE("serve on a fresh data dir creates it and lists no sessions", "[serve]") {
    TempDir dir;
    const auto data = dir / "x";
    REQUIRE_FALSE(fs::exists(data));
    Child server({cli, "serve", "--port", "0", "--data-dir", data.string()});
    const int port = wait_for_port(server);
    CHECK(fs::is_directory(data));

    httplib::Client client("127.0.0.1", port);
    auto r = client.Get("/api/sessions");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(nlohmann::json::parse(r->body) == nlohmann::json::array());
}

TEST_CASE("serve on an occupied port exits 3", "[serve]") {
    httplib::Server blocker;
    blocker.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    const int port = blocker.bind_to_any_port("0.0.0.0");
    REQUIRE(port > 0);

    TempDir dir;
    Child server({cli, "serve", "--port", std::to_string(port), "--data-dir", (dir / "data").string()});
    CHECK(server.wait() == 3);
}

TEST_CASE("serve with an unusable data dir exits 3", "[serve]") {
    TempDir dir;
    const auto file = dir / "not-a-dir";
    { std::ofstream(file) << "x"; }
    Child server({cli, "serve", "--port", "0", "--data-dir", (file / "sub").string()});
    CHECK(server.wait() == 3);
}

TEST_CASE("analyze and batch through the executable", "[serve]") {
    const std::string vtt = std::string(L2L_TEST_DATA) + "/vtt/zoom_session.vtt";
    Child ok({cli, "analyze", vtt, "--format", "csv"});
    CHECK(ok.read_line() == "speaker,name,talk_time_ms,talk_share");
    CHECK(ok.wait() == 0);

    Child missing({cli, "analyze", "/nonexistent/file.vtt"});
    CHECK(missing.wait() == 2);

    Child usage({cli, "analyze"});
    CHECK(usage.wait() == 2);

    Child bad_window({cli, "analyze", vtt, "--window-ms", "0"});
    CHECK(bad_window.wait() == 2);

    TempDir dir;
    Child empty({cli, "batch", dir.path().string()});
    CHECK(empty.read_line() == "0 ok / 0 failed");
    CHECK(empty.wait() == 0);
}
