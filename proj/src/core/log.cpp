#include "mansel/core/log.hpp"

#include <cstdlib>
#include <cstring>

namespace mansel::log {

namespace {

Level parse_env() {
  const char* env = std::getenv("MANSEL_LOG");
  if (!env) return Level::Warn;
  if (std::strcmp(env, "debug") == 0) return Level::Debug;
  if (std::strcmp(env, "info") == 0) return Level::Info;
  if (std::strcmp(env, "error") == 0) return Level::Error;
  return Level::Warn;
}

Level& state() {
  static Level lv = parse_env();
  return lv;
}

const char* tag(Level lv) {
  switch (lv) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    default: return "error";
  }
}

}  // namespace

Level level() { return state(); }
void set_level(Level lv) { state() = lv; }

void write(Level lv, const std::string& msg) {
  if (lv < state()) return;
  std::fprintf(stderr, "[mansel %s] %s\n", tag(lv), msg.c_str());
}

}  // namespace mansel::log
