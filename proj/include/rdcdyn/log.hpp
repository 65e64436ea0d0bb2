#pragma once

#include <string>

namespace rdcdyn {

void log_warning(const std::string& msg);
void log_info(const std::string& msg);

/// Suppress info/warning output (used by tests and batch sweeps).
void set_log_quiet(bool quiet);

}  // namespace rdcdyn
