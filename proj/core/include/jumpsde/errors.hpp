#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jumpsde {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

/// A path state became non-finite or left the divergence guard.
class DivergedPath : public Error {
 public:
  DivergedPath(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class DivergedField : public Error {
 public:
  DivergedField(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class OracleFailure : public Error {
 public:
  using Error::Error;
};

class InversionFailure : public Error {
 public:
  using Error::Error;
};

class SingularJump : public Error {
 public:
  using Error::Error;
};

class DomainExit : public Error {
 public:
  using Error::Error;
};

class DegenerateJacobian : public Error {
 public:
  using Error::Error;
};

class RatioUndefined : public Error {
 public:
  using Error::Error;
};

/// Explicit grid step violates the stability guard.
class StepSizeError : public Error {
 public:
  StepSizeError(const std::string& what, std::size_t suggested_steps)
      : Error(what), suggested_steps_(suggested_steps) {}
  std::size_t suggested_steps() const noexcept { return suggested_steps_; }

 private:
  std::size_t suggested_steps_;
};

}  // namespace jumpsde
