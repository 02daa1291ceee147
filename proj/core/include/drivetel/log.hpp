#ifndef DRIVETEL_LOG_HPP
#define DRIVETEL_LOG_HPP

#include <string>

namespace drivetel::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3 };

// Threshold comes from the DRIVETEL_LOG env var (debug|info|warn|error),
// default info. Messages go to stderr; report files never carry log output.
Level threshold();
void set_threshold(Level level);

void write(Level level, const std::string& message);

inline void debug(const std::string& m) { write(Level::debug, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void warn(const std::string& m) { write(Level::warn, m); }
inline void error(const std::string& m) { write(Level::error, m); }

}  // namespace drivetel::log

#endif
