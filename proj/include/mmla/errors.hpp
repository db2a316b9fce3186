#pragma once

#include <stdexcept>

namespace mmla {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct BoundsError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct WidthError : Error { using Error::Error; };
struct ModeMismatchError : Error { using Error::Error; };

} // namespace mmla
