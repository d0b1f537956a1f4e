#pragma once

#include <stdexcept>
#include <string>

namespace homodyne {

/// Configuration or input validation failure. The message starts with the
/// offending field path (e.g. "esa.vbw: ...") so front ends can surface it.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
    validation_error(const std::string& field_path, const std::string& detail)
        : std::runtime_error(field_path + ": " + detail) {}
};

/// Filesystem-level failure (unreadable input, unwritable output).
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace homodyne
