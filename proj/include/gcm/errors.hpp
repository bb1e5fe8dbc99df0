#pragma once

#include <stdexcept>
#include <string>

namespace gcm {

struct InvalidSpec : std::runtime_error {
  explicit InvalidSpec(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotChordal : std::runtime_error {
  explicit NotChordal(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct TooLargeToEnumerate : std::runtime_error {
  explicit TooLargeToEnumerate(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularMatrix : std::runtime_error {
  explicit SingularMatrix(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidRho : std::runtime_error {
  explicit InvalidRho(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotConverged : std::runtime_error {
  explicit NotConverged(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnboundedObjective : std::runtime_error {
  explicit UnboundedObjective(const std::string& msg) : std::runtime_error(msg) {}
};

struct FeatureExplosion : std::runtime_error {
  explicit FeatureExplosion(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gcm
