#pragma once

#include <stdexcept>
#include <string>

namespace rjbma {

// Bad user input: malformed data, config values, or requests.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem or archive problems (missing files, corrupted records).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A sampler or model invariant was broken; always a bug or numerical failure.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace rjbma
