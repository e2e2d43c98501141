#ifndef QUANTIMETRIC_ERRORS_HPP
#define QUANTIMETRIC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace quantimetric {

// Caller misuse: mixed quantales, malformed inputs, preconditions broken.
class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// A configured resource cap was hit (enumeration, BFS nodes, solver pivots).
class CapError : public std::runtime_error {
public:
  explicit CapError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace quantimetric

#endif
