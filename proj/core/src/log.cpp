#include "drivetel/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace drivetel::log {

namespace {

Level level_from_env() {
    const char* v = std::getenv("DRIVETEL_LOG");
    if (v == nullptr) return Level::info;
    std::string s(v);
    if (s == "debug") return Level::debug;
    if (s == "info") return Level::info;
    if (s == "warn") return Level::warn;
    if (s == "error") return Level::error;
    return Level::info;
}

Level g_threshold = level_from_env();
std::mutex g_mutex;

const char* tag(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
    }
    return "?";
}

}  // namespace

Level threshold() { return g_threshold; }

void set_threshold(Level level) { g_threshold = level; }

void write(Level level, const std::string& message) {
    if (level < g_threshold) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::cerr << "[" << tag(level) << "] " << message << "\n";
}

}  // namespace drivetel::log
