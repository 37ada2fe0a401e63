#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "l2l/atomic_file.hpp"
#include "l2l/session.hpp"

namespace l2l {

// One JSON document per session under <data_dir>/sessions/<CODE>.json,
// replaced atomically on every change. The in-memory index is rebuilt from a
// directory scan on construction; leftover temp files from an interrupted
// write are removed and unreadable documents are skipped with a warning.
//
// Writers of one session are serialised by that session's mutex; readers get
// an immutable snapshot and never wait on a writer.
class SessionStore {
public:
    using Snapshot = std::shared_ptr<const Session>;

    explicit SessionStore(std::filesystem::path data_dir) : dir_(std::move(data_dir) / "sessions") {
        std::filesystem::create_directories(dir_);
        load();
    }

    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    const std::filesystem::path& directory() const { return dir_; }
    const std::vector<std::string>& load_warnings() const { return load_warnings_; }

    // Stores a new session under the first code from `next_code` not already
    // taken. Gives up after `attempts` collisions.
    Session create(Session draft, const CodeSource& next_code, int attempts = 16) {
        std::unique_lock lock(index_mutex_);
        for (int i = 0; i < attempts; ++i) {
            auto code = next_code();
            if (index_.contains(code)) continue;
            draft.code = code;
            persist(draft);
            auto entry = std::make_shared<Entry>();
            entry->current = std::make_shared<const Session>(draft);
            index_.emplace(std::move(code), std::move(entry));
            return draft;
        }
        throw SessionError(SessionErrc::code_collision_exhausted,
                           "no free session code after " + std::to_string(attempts) + " attempts");
    }

    Snapshot find(const SessionCode& code) const {
        const auto entry = lookup(code);
        if (!entry) return nullptr;
        std::lock_guard g(entry->snapshot_mutex);
        return entry->current;
    }

    // Runs `fn` on a copy of the session while holding that session's write
    // lock, then persists and publishes the result. If `fn` throws, nothing
    // changes.
    template <class F>
    Session update(const SessionCode& code, F&& fn) {
        const auto entry = lookup(code);
        if (!entry) throw SessionError(SessionErrc::unknown_code, "unknown session code " + code.str());
        std::lock_guard write(entry->write_mutex);
        Session next = *current_of(*entry);
        fn(next);
        persist(next);
        auto published = std::make_shared<const Session>(next);
        std::lock_guard g(entry->snapshot_mutex);
        entry->current = std::move(published);
        return next;
    }

    std::vector<Snapshot> all() const {
        std::vector<std::shared_ptr<Entry>> entries;
        {
            std::shared_lock lock(index_mutex_);
            for (const auto& [_, e] : index_) entries.push_back(e);
        }
        std::vector<Snapshot> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(current_of(*e));
        return out;
    }

    std::size_t size() const {
        std::shared_lock lock(index_mutex_);
        return index_.size();
    }

private:
    struct Entry {
        std::mutex write_mutex;
        mutable std::mutex snapshot_mutex;
        Snapshot current;
    };

    static Snapshot current_of(const Entry& e) {
        std::lock_guard g(e.snapshot_mutex);
        return e.current;
    }

    std::shared_ptr<Entry> lookup(const SessionCode& code) const {
        std::shared_lock lock(index_mutex_);
        const auto it = index_.find(code);
        return it == index_.end() ? nullptr : it->second;
    }

    std::filesystem::path path_for(const SessionCode& code) const { return dir_ / (code.str() + ".json"); }

    void persist(const Session& s) const { write_file_atomic(path_for(s.code), to_json(s).dump() + "\n"); }

    void load() {
        for (const auto& item : std::filesystem::directory_iterator(dir_)) {
            const auto& path = item.path();
            if (!item.is_regular_file()) continue;
            if (is_temp_file(path)) {
                std::error_code ec;
                std::filesystem::remove(path, ec);
                continue;
            }
            if (path.extension() != ".json") continue;
            try {
                auto session = session_from_json(json::parse(read_file(path)));
                if (path.stem().string() != session.code.str())
                    throw std::invalid_argument("file name does not match session code");
                auto entry = std::make_shared<Entry>();
                entry->current = std::make_shared<const Session>(std::move(session));
                index_.emplace(entry->current->code, std::move(entry));
            } catch (const std::exception& e) {
                load_warnings_.push_back(path.filename().string() + ": " + e.what());
            }
        }
    }

    std::filesystem::path dir_;
    mutable std::shared_mutex index_mutex_;
    std::map<SessionCode, std::shared_ptr<Entry>> index_;
    std::vector<std::string> load_warnings_;
};

} // namespace l2l
