#include "sepnet/error.hpp"

namespace sepnet {

const char* category_name(ErrorCategory c) noexcept {
    switch (c) {
    case ErrorCategory::shape: return "shape";
    case ErrorCategory::singular: return "singular";
    case ErrorCategory::orientation: return "orientation";
    case ErrorCategory::data: return "data";
    case ErrorCategory::format: return "format";
    case ErrorCategory::config: return "config";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::io: return "io";
    }
    return "unknown";
}

int exit_code(ErrorCategory c) noexcept {
    switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::io: return 3;
    case ErrorCategory::format: return 4;
    case ErrorCategory::data: return 5;
    case ErrorCategory::shape:
    case ErrorCategory::orientation: return 6;
    case ErrorCategory::singular:
    case ErrorCategory::numeric: return 7;
    }
    return 1;
}

} // namespace sepnet
