#pragma once

#include <spdlog/spdlog.h>

namespace faultrank {

/// Configures the default spdlog logger from FAULTRANK_LOG
/// (error|warn|info|debug, default warn). Logs go to stderr.
void init_logging();

}  // namespace faultrank
