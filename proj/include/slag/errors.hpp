#pragma once

#include <stdexcept>
#include <string>

namespace slag {

// Root of every error the library raises. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid caller input: bad m, cap too small, radius out of range, malformed files.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

class GraphConditionError : public Error {
 public:
  using Error::Error;
};

// Hessian requested at the image of the singular point.
class SingularPointError : public Error {
 public:
  using Error::Error;
};

class InversionError : public Error {
 public:
  using Error::Error;
};

// Quadrature, Monte-Carlo or iterative tolerance not reached.
class ToleranceError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage gate rejected its input. `stage()` names the stage.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace slag
