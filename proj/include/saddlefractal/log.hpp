#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace saddlefractal {

// Log verbosity is read once from SADDLE_FRACTAL_LOG ({error,info,debug}).
enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("SADDLE_FRACTAL_LOG");
        if (env == nullptr) return LogLevel::Error;
        if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
        if (std::strcmp(env, "info") == 0) return LogLevel::Info;
        return LogLevel::Error;
    }();
    return level;
}

template <typename... Args>
void log_at(LogLevel lvl, const char* fmt, Args... args) {
    if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
    const char* tag = lvl == LogLevel::Error ? "error" : (lvl == LogLevel::Info ? "info" : "debug");
    std::fprintf(stderr, "[saddle-fractal %s] ", tag);
    if constexpr (sizeof...(args) == 0) {
        std::fputs(fmt, stderr);
    } else {
        std::fprintf(stderr, fmt, args...);
    }
    std::fputc('\n', stderr);
}

template <typename... Args>
void log_error(const char* fmt, Args... args) { log_at(LogLevel::Error, fmt, args...); }
template <typename... Args>
void log_info(const char* fmt, Args... args) { log_at(LogLevel::Info, fmt, args...); }
template <typename... Args>
void log_debug(const char* fmt, Args... args) { log_at(LogLevel::Debug, fmt, args...); }

} // namespace saddlefractal
