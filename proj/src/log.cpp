#include "gsem/log.hpp"

#include <cstdio>

namespace gsem {

void log_warn(std::string_view msg) {
    std::fprintf(stderr, "[gsem] warning: %.*s\n", static_cast<int>(msg.size()), msg.data());
}

}  // namespace gsem
