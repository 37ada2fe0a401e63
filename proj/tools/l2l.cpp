// l2l: analyse Zoom WebVTT transcripts offline or run the review service.
//
//   l2l analyze session.vtt [--format json|csv] [--output FILE|-] [--strict]
//   l2l batch   transcripts/ [--format json|csv] [--strict]
//   l2l serve   [--port N] [--data-dir DIR]
//
// Every option can also be set through an L2L_-prefixed environment variable
// (L2L_FORMAT, L2L_PORT, ...). The service additionally reads L2L_HOST,
// L2L_ASSETS_DIR and L2L_FETCH_TIMEOUT_MS.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <map>
#include <thread>

#include <pthread.h>

#include "CLI11.hpp"
#include "l2l/cli.hpp"
#include "l2l/serve.hpp"

namespace {

using l2l::cli::CliConfig;
using l2l::cli::OutputFormat;
using l2l::cli::Subcommand;

void add_analysis_options(CLI::App& cmd, CliConfig& cfg) {
    cmd.add_option("--merge-gap-ms", cfg.analysis.merge_gap_ms, "Merge same-speaker cues separated by at most this gap")
        ->envname("L2L_MERGE_GAP_MS")
        ->capture_default_str();
    cmd.add_option("--window-ms", cfg.analysis.window_ms, "Volatility window length")
        ->envname("L2L_WINDOW_MS")
        ->capture_default_str();
    cmd.add_option("--epsilon", cfg.analysis.epsilon, "Smoothing added to shares before log-returns")
        ->envname("L2L_EPSILON")
        ->capture_default_str();
}

void add_offline_options(CLI::App& cmd, CliConfig& cfg) {
    static const std::map<std::string, OutputFormat> formats{{"json", OutputFormat::json},
                                                             {"csv", OutputFormat::csv}};
    cmd.add_option("--format", cfg.format, "Report format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case))
        ->envname("L2L_FORMAT");
    cmd.add_flag("--strict", cfg.strict, "Fail on the first malformed cue instead of skipping it")
        ->envname("L2L_STRICT");
    add_analysis_options(cmd, cfg);
}

std::optional<std::string> env(const char* name) {
    if (const char* v = std::getenv(name); v && *v) return std::string(v);
    return std::nullopt;
}

int serve(const CliConfig& cfg) {
    l2l::cli::ServeOptions opts;
    if (auto host = env("L2L_HOST")) opts.host = *host;
    if (auto assets = env("L2L_ASSETS_DIR")) opts.assets_dir = *assets;
    if (auto timeout = env("L2L_FETCH_TIMEOUT_MS")) opts.fetch_timeout = std::chrono::milliseconds(std::stoll(*timeout));

    // Termination signals are taken synchronously by a dedicated thread.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::thread waiter;
    opts.on_listening = [&](httplib::Server& server) {
        waiter = std::thread([&server, signals] {
            int sig = 0;
            sigwait(&signals, &sig);
            server.stop();
        });
    };
    const int rc = l2l::cli::cmd_serve(cfg, opts, std::cout, std::cerr);
    if (waiter.joinable()) {
        pthread_kill(waiter.native_handle(), SIGTERM);
        waiter.join();
    }
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conversation metrics for Zoom WebVTT transcripts"};
    app.require_subcommand(1);

    CliConfig cfg;
    std::string input;

    auto* analyze = app.add_subcommand("analyze", "Analyse one transcript into a report");
    analyze->add_option("input", input, "WebVTT transcript")->required();
    analyze->add_option("--output", cfg.output, "Output file, or - for standard output")
        ->envname("L2L_OUTPUT")
        ->capture_default_str();
    add_offline_options(*analyze, cfg);

    auto* batch = app.add_subcommand("batch", "Analyse every *.vtt in a directory");
    batch->add_option("dir", input, "Directory of transcripts")->required();
    add_offline_options(*batch, cfg);

    auto* serve_cmd = app.add_subcommand("serve", "Run the session service");
    serve_cmd->add_option("--port", cfg.port, "Listen port (0 picks a free port)")
        ->envname("L2L_PORT")
        ->capture_default_str();
    serve_cmd->add_option("--data-dir", cfg.data_dir, "Session storage directory")
        ->envname("L2L_DATA_DIR")
        ->capture_default_str();
    add_analysis_options(*serve_cmd, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : l2l::cli::io_error;
    }

    if (!input.empty()) cfg.inputs = {input};
    if (analyze->parsed()) {
        cfg.subcommand = Subcommand::analyze;
        return l2l::cli::cmd_analyze(cfg, std::cout, std::cerr);
    }
    if (batch->parsed()) {
        cfg.subcommand = Subcommand::batch;
        return l2l::cli::cmd_batch(cfg, std::cout, std::cerr);
    }
    cfg.subcommand = Subcommand::serve;
    return serve(cfg);
}
