#pragma once

#include <spdlog/spdlog.h>

namespace slicelab {

/// Library logger. Verbosity comes from the SLICELAB_LOG environment
/// variable (trace, debug, info, warn, error, off); default is warn.
spdlog::logger& log();

}  // namespace slicelab
