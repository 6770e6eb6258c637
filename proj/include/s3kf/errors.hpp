#pragma once

#include <stdexcept>
#include <string>

namespace s3kf {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Displacement direction undefined: the two bearings are (nearly) antipodal.
class AntipodalError : public Error {
 public:
  using Error::Error;
};

/// Tangent coordinates outside the chart validity domain (norm >= pi).
class ChartDomainError : public Error {
 public:
  using Error::Error;
};

class NegativeDtError : public Error {
 public:
  using Error::Error;
};

class NonPositiveDtError : public Error {
 public:
  using Error::Error;
};

/// Box height too small for a usable depth conversion.
class DegenerateBoxError : public Error {
 public:
  using Error::Error;
};

/// Image and LiDAR packet timestamps diverge beyond the sync window.
class SyncError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Innovation covariance not invertible even after eigenvalue clamping.
class SingularInnovation : public Error {
 public:
  using Error::Error;
};

class NonMonotonicTimeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class EmptyLogError : public Error {
 public:
  using Error::Error;
};

class NoMatchesError : public Error {
 public:
  using Error::Error;
};

}  // namespace s3kf
