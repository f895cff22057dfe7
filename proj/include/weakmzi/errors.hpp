#pragma once

#include <stdexcept>
#include <string>

namespace weakmzi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double partial)
      : Error(what), partial_value_(partial) {}
  double partial_value() const { return partial_value_; }

 private:
  double partial_value_;
};

class BracketError : public Error {
 public:
  using Error::Error;
};

class DomainCoverageError : public Error {
 public:
  using Error::Error;
};

class SingularWeakValueError : public Error {
 public:
  using Error::Error;
};

class UndefinedWeightsError : public Error {
 public:
  using Error::Error;
};

class LocalityViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace weakmzi
