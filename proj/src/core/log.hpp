#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace mgg {

/// Shared library logger ("mgg", stderr). Warnings about clamped edges,
/// disconnected nodes and out-of-range features go through here.
std::shared_ptr<spdlog::logger> logger();

} // namespace mgg
