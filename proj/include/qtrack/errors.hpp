#pragma once

#include <stdexcept>
#include <string>

namespace qtrack {

// Error taxonomy shared across the library. The CLI maps these onto exit
// codes: usage -> 1, data -> 2, numeric -> 3.
struct SizeError : std::runtime_error {
  explicit SizeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IndexError : std::runtime_error {
  explicit IndexError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ArityError : std::runtime_error {
  explicit ArityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RangeError : std::runtime_error {
  explicit RangeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConstructionError : std::runtime_error {
  explicit ConstructionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

struct JoinError : std::runtime_error {
  explicit JoinError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularityError : std::runtime_error {
  explicit SingularityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnsupportedModeError : std::runtime_error {
  explicit UnsupportedModeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CompatibilityError : std::runtime_error {
  explicit CompatibilityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct AlignmentError : std::runtime_error {
  explicit AlignmentError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateClassError : std::runtime_error {
  explicit DegenerateClassError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qtrack
