#pragma once

#include <stdexcept>
#include <string>

namespace olcb {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class OriginNotInterior : public Error {
 public:
  using Error::Error;
};

class DimensionUnsupported : public Error {
 public:
  using Error::Error;
};

class SingularMap : public Error {
 public:
  using Error::Error;
};

class ZeroDirection : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class MonotonicityViolation : public Error {
 public:
  using Error::Error;
};

class BracketFailure : public Error {
 public:
  using Error::Error;
};

class BoundaryPoint : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace olcb
