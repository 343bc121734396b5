#pragma once

#include <string_view>

namespace gsem {

// Non-fatal diagnostics (degraded recall, policy fallback, dropped items).
// Goes to stderr so byte-stable stdout artifacts stay clean.
void log_warn(std::string_view msg);

}  // namespace gsem
