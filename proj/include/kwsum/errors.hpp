#pragma once

#include <stdexcept>
#include <string>

namespace kwsum {

// Bad or missing input data (files, corpus contents, id ranges).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure during optimization (non-finite loss).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace kwsum
