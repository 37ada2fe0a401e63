#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "l2l/metrics.hpp"
#include "l2l/session.hpp"
#include "l2l/session_store.hpp"
#include "l2l/vtt.hpp"

namespace l2l {

class FetchError : public std::runtime_error {
public:
    enum class Kind { http_status, timeout, too_large, transport };

    FetchError(Kind kind, const std::string& what, int http_status = 0)
        : std::runtime_error(what), kind_(kind), http_status_(http_status) {}

    Kind kind() const noexcept { return kind_; }
    int http_status() const noexcept { return http_status_; }

private:
    Kind kind_;
    int http_status_;
};

// URL -> transcript bytes. Implementations throw FetchError.
class TranscriptFetcher {
public:
    virtual ~TranscriptFetcher() = default;
    virtual std::string fetch(const std::string& url) = 0;
};

struct Notification {
    std::string to;
    std::string subject;
    std::string body;
};

class Notifier {
public:
    virtual ~Notifier() = default;
    virtual void send(const Notification& message) = 0;
};

// Appends one JSON line per message to an outbox file instead of mailing it.
class OutboxNotifier final : public Notifier {
public:
    explicit OutboxNotifier(std::filesystem::path outbox) : path_(std::move(outbox)) {}

    void send(const Notification& m) override {
        const auto line = json{{"to", m.to}, {"subject", m.subject}, {"body", m.body}}.dump() + "\n";
        std::lock_guard g(mutex_);
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        out << line;
    }

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mutex_;
};

template <class T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    bool try_push(T value) {
        std::lock_guard g(mutex_);
        if (closed_ || items_.size() >= capacity_) return false;
        items_.push_back(std::move(value));
        ready_.notify_one();
        return true;
    }

    // Blocks until an item is available; empty once closed and drained.
    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [&] { return closed_ || !items_.empty(); });
        if (items_.empty()) return std::nullopt;
        T v = std::move(items_.front());
        items_.pop_front();
        return v;
    }

    void close() {
        std::lock_guard g(mutex_);
        closed_ = true;
        ready_.notify_all();
    }

    std::size_t size() const {
        std::lock_guard g(mutex_);
        return items_.size();
    }

private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<T> items_;
    bool closed_ = false;
};

struct ServiceConfig {
    AnalysisConfig analysis{};
    std::size_t queue_capacity = 64;
    // Without a worker, queued analysis never runs; callers drive
    // run_analysis themselves.
    bool start_worker = true;
    std::function<Clock::time_point()> clock = [] { return Clock::now(); };
};

class SessionService {
public:
    SessionService(std::filesystem::path data_dir, std::shared_ptr<TranscriptFetcher> fetcher,
                   std::shared_ptr<Notifier> notifier, ServiceConfig config = {},
                   CodeSource codes = CodeGenerator{})
        : store_(data_dir), fetcher_(std::move(fetcher)), notifier_(std::move(notifier)),
          config_(std::move(config)), codes_(std::move(codes)), queue_(config_.queue_capacity) {
        if (config_.start_worker) {
            // Sessions left mid-analysis by a previous process are picked up again.
            for (const auto& s : store_.all())
                if (s->status == SessionStatus::awaiting_analysis) recovered_.push_back(s->code);
            std::sort(recovered_.begin(), recovered_.end());
            pending_ = recovered_.size();
            worker_ = std::thread([this] { work(); });
        }
    }

    ~SessionService() {
        queue_.close();
        if (worker_.joinable()) worker_.join();
    }

    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    const SessionStore& store() const { return store_; }
    const ServiceConfig& config() const { return config_; }

    Session register_session(const std::vector<std::string>& emails) {
        if (emails.empty()) throw SessionError(SessionErrc::no_participants, "at least one email is required");
        if (emails.size() > max_participants)
            throw SessionError(SessionErrc::too_many_participants,
                               "at most " + std::to_string(max_participants) + " participants");
        for (const auto& e : emails)
            if (!is_valid_email(e)) throw SessionError(SessionErrc::invalid_email, e);

        // Stored with millisecond precision; keep the in-memory copy identical.
        const auto now = std::chrono::floor<std::chrono::milliseconds>(config_.clock());
        Session draft{*SessionCode::parse("AAAAAAAA"), emails, now, {}, {}, SessionStatus::registered, {}, {}};
        auto session = [&] {
            std::lock_guard g(codes_mutex_);
            return store_.create(std::move(draft), codes_);
        }();

        for (const auto& e : session.participant_emails)
            notifier_->send({e, "Conversation session " + session.code.str(),
                             "Your session is registered. Keep this code to review the session later: " +
                                 session.code.str()});
        return session;
    }

    Session submit_recording(std::string_view code_text, const std::string& video_url,
                             const std::string& transcript_url) {
        const auto code = require_code(code_text);
        if (!is_valid_url(video_url)) throw SessionError(SessionErrc::invalid_url, "video_url: " + video_url);
        if (!is_valid_url(transcript_url))
            throw SessionError(SessionErrc::invalid_url, "transcript_url: " + transcript_url);

        return store_.update(code, [&](Session& s) {
            transition(s, SessionStatus::awaiting_analysis);
            if (config_.start_worker) {
                {
                    std::lock_guard g(idle_mutex_);
                    ++pending_;
                }
                if (!queue_.try_push(code)) {
                    finish_one();
                    throw SessionError(SessionErrc::queue_full, "analysis queue is full; retry later",
                                       s.status);
                }
            }
            s.status = SessionStatus::awaiting_analysis;
            s.video_url = video_url;
            s.transcript_url = transcript_url;
            s.failure_reason.reset();
            s.report.reset();
        });
    }

    // Fetch, parse and analysis failures end in status=failed; they are not
    // thrown. Only a missing session or a session in the wrong state throws.
    Session run_analysis(std::string_view code_text) {
        const auto code = require_code(code_text);
        return store_.update(code, [&](Session& s) {
            if (s.status != SessionStatus::awaiting_analysis)
                throw SessionError(SessionErrc::wrong_state,
                                   "session is " + std::string(to_string(s.status)) + ", not awaiting_analysis",
                                   s.status);
            auto fail = [&](std::string reason) {
                s.status = SessionStatus::failed;
                s.failure_reason = std::move(reason);
                s.report.reset();
            };
            std::string bytes;
            try {
                bytes = fetcher_->fetch(*s.transcript_url);
            } catch (const std::exception& e) {
                return fail(std::string("fetch failed: ") + e.what());
            }
            ParseResult parsed;
            try {
                parsed = parse_vtt(bytes, ParseMode::lenient);
            } catch (const std::exception& e) {
                return fail(std::string("parse failed: ") + e.what());
            }
            try {
                s.report = analyze(parsed.cues, config_.analysis);
            } catch (const std::exception& e) {
                return fail(std::string("analysis failed: ") + e.what());
            }
            s.status = SessionStatus::analyzed;
            s.failure_reason.reset();
        });
    }

    MetricsReport get_report(std::string_view code_text) const {
        const auto code = require_code(code_text);
        const auto s = store_.find(code);
        if (!s) throw SessionError(SessionErrc::unknown_code, "unknown session code " + code.str());
        if (s->status != SessionStatus::analyzed)
            throw SessionError(SessionErrc::not_ready, "session is " + std::string(to_string(s->status)),
                               s->status);
        return *s->report;
    }

    std::optional<Session> find(std::string_view code_text) const {
        const auto code = SessionCode::parse(code_text);
        if (!code) return std::nullopt;
        const auto s = store_.find(*code);
        if (!s) return std::nullopt;
        return *s;
    }

    // Newest first; ties broken by code.
    std::vector<SessionSummary> list_sessions(std::optional<SessionStatus> filter = std::nullopt) const {
        std::vector<SessionSummary> out;
        for (const auto& s : store_.all())
            if (!filter || s->status == *filter) out.push_back(summarize(*s));
        std::sort(out.begin(), out.end(), [](const SessionSummary& a, const SessionSummary& b) {
            return a.created_at != b.created_at ? a.created_at > b.created_at : a.code < b.code;
        });
        return out;
    }

    // Blocks until every queued or recovered analysis has finished.
    void wait_idle() {
        std::unique_lock lock(idle_mutex_);
        idle_.wait(lock, [&] { return pending_ == 0; });
    }

private:
    static void transition(const Session& s, SessionStatus to) {
        if (!is_legal_transition(s.status, to))
            throw SessionError(SessionErrc::wrong_state,
                               "cannot move session from " + std::string(to_string(s.status)) + " to " +
                                   std::string(to_string(to)),
                               s.status);
    }

    SessionCode require_code(std::string_view text) const {
        const auto code = SessionCode::parse(text);
        if (!code) throw SessionError(SessionErrc::unknown_code, "unknown session code " + std::string(text));
        return *code;
    }

    void finish_one() {
        std::lock_guard g(idle_mutex_);
        if (pending_ > 0 && --pending_ == 0) idle_.notify_all();
    }

    void analyse_quietly(const SessionCode& code) {
        try {
            run_analysis(code.str());
        } catch (const std::exception&) {
            // Already analysed or resubmitted elsewhere; nothing to record.
        }
        finish_one();
    }

    void work() {
        for (const auto& code : recovered_) analyse_quietly(code);
        while (auto code = queue_.pop()) analyse_quietly(*code);
    }

    SessionStore store_;
    std::shared_ptr<TranscriptFetcher> fetcher_;
    std::shared_ptr<Notifier> notifier_;
    ServiceConfig config_;

    std::mutex codes_mutex_;
    CodeSource codes_;

    BoundedQueue<SessionCode> queue_;
    std::vector<SessionCode> recovered_;
    std::thread worker_;

    std::mutex idle_mutex_;
    std::condition_variable idle_;
    std::size_t pending_ = 0;
};

} // namespace l2l
