#pragma once

#include <stdexcept>
#include <string>

namespace sepnet {

enum class ErrorCategory {
    shape,
    singular,
    orientation,
    data,
    format,
    config,
    numeric,
    io,
};

const char* category_name(ErrorCategory c) noexcept;

// Process exit code used by the CLI for each category.
int exit_code(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define SEPNET_DEFINE_ERROR(Name, cat)                                        \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(ErrorCategory::cat, what) {} \
    };

SEPNET_DEFINE_ERROR(ShapeError, shape)
SEPNET_DEFINE_ERROR(SingularityError, singular)
SEPNET_DEFINE_ERROR(OrientationError, orientation)
SEPNET_DEFINE_ERROR(DataError, data)
SEPNET_DEFINE_ERROR(FormatError, format)
SEPNET_DEFINE_ERROR(ConfigError, config)
SEPNET_DEFINE_ERROR(NumericError, numeric)
SEPNET_DEFINE_ERROR(IoError, io)

#undef SEPNET_DEFINE_ERROR

} // namespace sepnet
