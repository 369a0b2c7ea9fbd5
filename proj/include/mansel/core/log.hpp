#pragma once

#include <cstdio>
#include <string>

namespace mansel::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3 };

/// Active level, initialized once from the MANSEL_LOG environment variable
/// (debug|info|warn|error, default warn).
Level level();
void set_level(Level lv);

void write(Level lv, const std::string& msg);

inline void debug(const std::string& msg) { write(Level::Debug, msg); }
inline void info(const std::string& msg) { write(Level::Info, msg); }
inline void warn(const std::string& msg) { write(Level::Warn, msg); }
inline void error(const std::string& msg) { write(Level::Error, msg); }

}  // namespace mansel::log
