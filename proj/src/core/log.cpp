#include "core/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace mgg {

std::shared_ptr<spdlog::logger> logger() {
    static std::shared_ptr<spdlog::logger> instance = [] {
        auto existing = spdlog::get("mgg");
        if (existing) {
            return existing;
        }
        auto created = spdlog::stderr_color_mt("mgg");
        created->set_pattern("[%l] %v");
        created->set_level(spdlog::level::warn);
        return created;
    }();
    return instance;
}

} // namespace mgg
