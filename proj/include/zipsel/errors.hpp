#pragma once

#include <stdexcept>
#include <string>

namespace zipsel {

/// Bad user input: unreadable files, malformed records, out-of-range config.
/// Maps to process exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal invariant breach. Maps to process exit code 3.
class InvariantError : public std::logic_error {
public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

} // namespace zipsel
