#pragma once

#include <spdlog/spdlog.h>

namespace fracture {

/// Library logger. Level is taken from the FRACTURE_LOG environment variable
/// (trace, debug, info, warn, error, off); default is warn.
spdlog::logger& logger();

}  // namespace fracture
