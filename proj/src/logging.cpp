#include "twinface/logging.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace twinface::log {

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("twinface");
    l->set_level(spdlog::level::info);
    return l;
  }();
  return instance;
}

}  // namespace

void init(std::string_view name) {
  auto l = logger();
  l->set_pattern("%Y-%m-%dT%H:%M:%S.%e [" + std::string(name) + "] %l %v");
  if (const char* env = std::getenv("PURA_LOG")) {
    auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour names it knows.
    if (level != spdlog::level::off || std::string(env) == "off") l->set_level(level);
  }
}

void debug(std::string_view msg) { logger()->debug(msg); }
void info(std::string_view msg) { logger()->info(msg); }
void warn(std::string_view msg) { logger()->warn(msg); }
void error(std::string_view msg) { logger()->error(msg); }

}  // namespace twinface::log
