#pragma once

// Offline commands behind the `l2l` executable. Each returns a process exit
// code: 0 success, 1 transcript parse failure (or any failed file in a
// batch), 2 I/O or usage error, 3 service startup failure.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "l2l/atomic_file.hpp"
#include "l2l/metrics.hpp"
#include "l2l/report_json.hpp"
#include "l2l/vtt.hpp"

namespace l2l::cli {

enum ExitCode : int { ok = 0, parse_error = 1, io_error = 2, startup_error = 3 };

enum class Subcommand { analyze, batch, serve };
enum class OutputFormat { json, csv };

struct CliConfig {
    Subcommand subcommand = Subcommand::analyze;
    std::vector<std::filesystem::path> inputs;
    std::string output = "-";
    OutputFormat format = OutputFormat::json;
    AnalysisConfig analysis{};
    bool strict = false;
    int port = 8080;
    std::filesystem::path data_dir = "l2l-data";

    // Empty when valid.
    std::string validate() const {
        if (format == OutputFormat::csv && subcommand == Subcommand::serve)
            return "--format csv is only valid for analyze and batch";
        if (analysis.merge_gap_ms < 0) return "--merge-gap-ms must not be negative";
        if (analysis.window_ms <= 0) return "--window-ms must be positive";
        if (!(analysis.epsilon > 0.0)) return "--epsilon must be positive";
        if (port < 0 || port > 65535) return "--port must be in 0..65535";
        if (subcommand != Subcommand::serve && inputs.size() != 1) return "exactly one input path is required";
        return {};
    }
};

inline std::string render(const MetricsReport& r, OutputFormat format) {
    return format == OutputFormat::csv ? report_to_csv(r) : report_to_json_text(r);
}

struct FileOutcome {
    int exit_code = ok;
    std::optional<MetricsReport> report;
    std::vector<std::string> messages; // diagnostics, one per line
};

inline FileOutcome analyze_file(const std::filesystem::path& path, const CliConfig& config) {
    FileOutcome out;
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const std::exception& e) {
        out.exit_code = io_error;
        out.messages.push_back("error: " + path.string() + ": " + e.what());
        return out;
    }
    try {
        const auto parsed = parse_vtt(bytes, config.strict ? ParseMode::strict : ParseMode::lenient);
        for (const auto& w : parsed.diagnostics.warnings)
            out.messages.push_back("warning: " + path.string() + ":" + std::to_string(w.line) + ": " + w.message);
        out.report = analyze(parsed.cues, config.analysis);
    } catch (const VttError& e) {
        out.exit_code = parse_error;
        out.messages.push_back("error: " + path.string() + ": " + e.what());
    } catch (const MetricsError& e) {
        out.exit_code = io_error;
        out.messages.push_back("error: " + std::string(e.what()));
    }
    return out;
}

inline int cmd_analyze(const CliConfig& config, std::ostream& out, std::ostream& diag) {
    if (const auto problem = config.validate(); !problem.empty()) {
        diag << "error: " << problem << '\n';
        return io_error;
    }
    const auto& path = config.inputs.front();
    auto outcome = analyze_file(path, config);
    for (const auto& m : outcome.messages) diag << m << '\n';
    if (!outcome.report) return outcome.exit_code;

    const auto text = render(*outcome.report, config.format);
    if (config.output == "-") {
        out << text;
        out.flush();
        return out ? ok : io_error;
    }
    try {
        write_file_atomic(config.output, text);
    } catch (const std::exception& e) {
        diag << "error: " << config.output << ": " << e.what() << '\n';
        return io_error;
    }
    return ok;
}

// `<stem>.report.json` (or `.report.csv`) beside the transcript.
inline std::filesystem::path batch_output_path(const std::filesystem::path& input, OutputFormat format) {
    auto p = input;
    p.replace_filename(input.stem().string() + (format == OutputFormat::csv ? ".report.csv" : ".report.json"));
    return p;
}

inline std::string batch_summary(std::size_t ok_count, std::size_t failed_count) {
    return std::to_string(ok_count) + " ok / " + std::to_string(failed_count) + " failed";
}

inline int cmd_batch(const CliConfig& config, std::ostream& out, std::ostream& diag) {
    if (const auto problem = config.validate(); !problem.empty()) {
        diag << "error: " << problem << '\n';
        return io_error;
    }
    const auto& dir = config.inputs.front();
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        diag << "error: " << dir.string() << ": not a directory\n";
        return io_error;
    }

    std::vector<std::filesystem::path> files;
    for (const auto& item : std::filesystem::directory_iterator(dir, ec))
        if (item.is_regular_file() && item.path().extension() == ".vtt") files.push_back(item.path());
    if (ec) {
        diag << "error: " << dir.string() << ": " << ec.message() << '\n';
        return io_error;
    }
    std::sort(files.begin(), files.end());

    std::atomic<std::size_t> next{0}, failed{0};
    std::mutex diag_mutex;
    auto worker = [&] {
        for (auto i = next++; i < files.size(); i = next++) {
            auto outcome = analyze_file(files[i], config);
            if (outcome.report) {
                try {
                    write_file_atomic(batch_output_path(files[i], config.format),
                                      render(*outcome.report, config.format));
                } catch (const std::exception& e) {
                    outcome.messages.push_back("error: " + files[i].string() + ": " + e.what());
                    outcome.report.reset();
                }
            }
            if (!outcome.report) ++failed;
            if (!outcome.messages.empty()) {
                std::lock_guard g(diag_mutex);
                for (const auto& m : outcome.messages) diag << m << '\n';
            }
        }
    };
    const auto threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(threads, files.size()); ++t) pool.emplace_back(worker);
    worker();
    pool.clear();

    out << batch_summary(files.size() - failed, failed) << '\n';
    return failed == 0 ? ok : parse_error;
}

} // namespace l2l::cli
