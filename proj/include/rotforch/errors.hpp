#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rotforch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DegenerateCoefficient : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Raised by expression evaluation (log of nonpositive, division by zero, ...).
class FieldDomainError : public Error {
 public:
  using Error::Error;
};

class InvalidExponent : public Error {
 public:
  InvalidExponent(const std::string& inequality, const std::string& detail)
      : Error(inequality + ": " + detail), inequality_(inequality) {}
  const std::string& inequality() const { return inequality_; }

 private:
  std::string inequality_;
};

class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double t, double dt)
      : Error(what), t_(t), dt_(dt) {}
  double time() const { return t_; }
  double dt() const { return dt_; }

 private:
  double t_;
  double dt_;
};

class SmallnessViolation : public Error {
 public:
  SmallnessViolation(const std::string& what, double critical_time)
      : Error(what), critical_time_(critical_time) {}
  double critical_time() const { return critical_time_; }

 private:
  double critical_time_;
};

class DivergentFunctional : public Error {
 public:
  DivergentFunctional(const std::string& name, const std::string& detail)
      : Error(name + " diverges: " + detail), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& detail)
      : Error(key.empty() ? detail : key + ": " + detail), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace rotforch
