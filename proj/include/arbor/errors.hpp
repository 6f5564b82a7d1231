#pragma once

#include <stdexcept>
#include <string>

namespace arbor {

// Thrown when a computation would exceed a hard size guard (enumeration
// width, tree size). CLI maps this to exit code 3.
class GuardExceeded : public std::runtime_error {
public:
    explicit GuardExceeded(const std::string& what) : std::runtime_error(what) {}
};

} // namespace arbor
