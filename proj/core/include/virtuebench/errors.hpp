#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vb {

class WidthMismatch : public std::runtime_error {
 public:
  explicit WidthMismatch(const std::string& what) : std::runtime_error(what) {}
};

class EmptyDatasetError : public std::runtime_error {
 public:
  explicit EmptyDatasetError(const std::string& what) : std::runtime_error(what) {}
};

class UnknownSymbol : public std::runtime_error {
 public:
  explicit UnknownSymbol(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a symbol stream does not parse back into a valid explanation.
// Neighborhood search treats this as an infeasible neighbor, not a failure.
class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

class NeighborhoodTooLarge : public std::runtime_error {
 public:
  NeighborhoodTooLarge(uint64_t size, uint64_t cap)
      : std::runtime_error("edit neighborhood has " + std::to_string(size) +
                           " candidates, cap is " + std::to_string(cap)),
        size(size),
        cap(cap) {}
  uint64_t size;
  uint64_t cap;
};

class MissingThreshold : public std::runtime_error {
 public:
  explicit MissingThreshold(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vb
