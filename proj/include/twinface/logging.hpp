#pragma once

// Process logging. The level comes from PURA_LOG (trace, debug, info, warn,
// error, off; default info). Callers never pass plaintexts, gamma or key
// material; messages carry ids, counts and timings only.

#include <string_view>

namespace twinface::log {

void init(std::string_view name);
void debug(std::string_view msg);
void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);

}  // namespace twinface::log
