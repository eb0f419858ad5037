#pragma once

#include <stdexcept>
#include <string>

namespace trajfuse {

/// Mismatched or invalid tensor/array dimensions.
struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or inconsistent external data (files, datasets, configs).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values or violated numeric preconditions.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace trajfuse
