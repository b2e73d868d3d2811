#pragma once

/// Leveled logging to stderr, so artifact files stay byte-deterministic.
/// MBE_LOG selects the level by name (error, info, debug); default info.

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>

namespace mbe {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("MBE_LOG");
        if (!env) return LogLevel::Info;
        std::string s(env);
        if (s == "error" || s == "0") return LogLevel::Error;
        if (s == "debug" || s == "2") return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return level;
}

namespace detail {
inline std::mutex& log_mutex() {
    static std::mutex mu;
    return mu;
}
}  // namespace detail

inline void log_at(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    std::lock_guard<std::mutex> lock(detail::log_mutex());
    std::fputs((msg + "\n").c_str(), stderr);
}

inline void log_error(const std::string& msg) { log_at(LogLevel::Error, "error: " + msg); }
inline void log_info(const std::string& msg) { log_at(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log_at(LogLevel::Debug, msg); }

}  // namespace mbe
