#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace dvrpsr::log {

enum Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Level comes from the DVRPSR_LOG env var: error|warn|info|debug. Default warn.
inline Level level() {
    static Level lv = [] {
        const char* e = std::getenv("DVRPSR_LOG");
        if (!e) return kWarn;
        if (!std::strcmp(e, "error")) return kError;
        if (!std::strcmp(e, "info")) return kInfo;
        if (!std::strcmp(e, "debug")) return kDebug;
        return kWarn;
    }();
    return lv;
}

template <typename... Args>
void emit(Level lv, const char* tag, const char* fmt, Args... args) {
    if (lv > level()) return;
    std::fprintf(stderr, "[%s] ", tag);
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

template <typename... Args>
void warn(const char* fmt, Args... args) { emit(kWarn, "warn", fmt, args...); }
template <typename... Args>
void info(const char* fmt, Args... args) { emit(kInfo, "info", fmt, args...); }
template <typename... Args>
void debug(const char* fmt, Args... args) { emit(kDebug, "debug", fmt, args...); }

}  // namespace dvrpsr::log
