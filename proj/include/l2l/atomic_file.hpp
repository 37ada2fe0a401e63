#pragma once

#include <atomic>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <system_error>

#include <fcntl.h>
#include <unistd.h>

namespace l2l {

inline constexpr std::string_view temp_marker = ".tmp.";

namespace detail {

[[noreturn]] inline void throw_errno(const std::string& what) {
    throw std::system_error(errno, std::generic_category(), what);
}

inline void fsync_dir(const std::filesystem::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

} // namespace detail

// Writes to a sibling temp file, fsyncs, then renames over the target, so a
// reader (or a restarted process) sees either the old or the new content.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
    static std::atomic<unsigned long> counter{0};
    auto tmp = path;
    tmp += std::string(temp_marker) + std::to_string(::getpid()) + "." + std::to_string(counter++);

    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) detail::throw_errno("open " + tmp.string());
    auto fail = [&](const std::string& what) {
        const int saved = errno;
        ::close(fd);
        ::unlink(tmp.c_str());
        errno = saved;
        detail::throw_errno(what);
    };
    std::size_t written = 0;
    while (written < data.size()) {
        const auto n = ::write(fd, data.data() + written, data.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("write " + tmp.string());
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) fail("fsync " + tmp.string());
    if (::close(fd) != 0) {
        ::unlink(tmp.c_str());
        detail::throw_errno("close " + tmp.string());
    }
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        const int saved = errno;
        ::unlink(tmp.c_str());
        errno = saved;
        detail::throw_errno("rename " + tmp.string());
    }
    detail::fsync_dir(path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

inline bool is_temp_file(const std::filesystem::path& p) {
    return p.filename().string().find(temp_marker) != std::string::npos;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::system_error(errno ? errno : ENOENT, std::generic_category(), "open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw std::system_error(EIO, std::generic_category(), "read " + path.string());
    return data;
}

} // namespace l2l
