#pragma once

#include <stdexcept>
#include <string>

namespace symflow {

/// Base class of all symflow failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Degree precondition violated (wedge past the top degree, contraction of a
/// scalar, ...).
class DegreeError final : public Error {
 public:
  explicit DegreeError(const std::string& msg) : Error(msg) {}
};

/// Symplectic form with a singular coefficient matrix.
class DegenerateFrameError final : public Error {
 public:
  explicit DegenerateFrameError(const std::string& msg) : Error(msg) {}
};

/// A 3-form whose Hitchin invariant is non-negative, where a positive form is
/// required.
class NotPositiveError final : public Error {
 public:
  explicit NotPositiveError(const std::string& msg) : Error(msg) {}
};

/// omega ^ phi != 0 where a compatible (primitive) form is required.  Kept
/// distinct from NotPositiveError so callers can tell the two geometric
/// failure modes apart.
class NotPrimitiveError final : public Error {
 public:
  explicit NotPrimitiveError(const std::string& msg) : Error(msg) {}
};

/// Invalid run configuration (bad preset name, schema violation, ...).
class ConfigError final : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// A numerical guard tripped during a run: positivity loss along a flow,
/// log-weight floor, step-size underflow, SPD loss on the grid.
class GeometricError final : public Error {
 public:
  explicit GeometricError(const std::string& msg) : Error(msg) {}
};

}  // namespace symflow
