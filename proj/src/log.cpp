#include "rdcdyn/log.hpp"

#include <atomic>
#include <iostream>

namespace rdcdyn {

namespace {
std::atomic<bool> g_quiet{false};
}

void set_log_quiet(bool quiet) { g_quiet = quiet; }

void log_warning(const std::string& msg) {
  if (!g_quiet) std::cerr << "warning: " << msg << "\n";
}

void log_info(const std::string& msg) {
  if (!g_quiet) std::cerr << "info: " << msg << "\n";
}

}  // namespace rdcdyn
