#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvcreg {

// Base class for every library failure. `code()` is a stable identifier the
// CLI prints as a machine-parsable prefix.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error("InvalidInput", what) {}
};

// Concentration vectors are (near-)linearly dependent: det of the Gramian is
// at or below the configured floor, so the components are not identifiable.
class SingularGramian : public Error {
 public:
  SingularGramian(double det, double det_tol);
  double det() const noexcept { return det_; }

 private:
  double det_;
};

// The weighted normal matrix X^T A X of one component is (numerically)
// singular, i.e. the component's regressor second-moment matrix is not
// invertible at this sample size.
class SingularNormalMatrix : public Error {
 public:
  SingularNormalMatrix(std::size_t component, double condition, double xtx_tol);
  double condition() const noexcept { return condition_; }
  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t component_;
  double condition_;
};

class DegenerateWeights : public Error {
 public:
  DegenerateWeights(std::size_t component, double mean_abs_weight);
};

class SingularD : public Error {
 public:
  explicit SingularD(std::size_t component);
};

class NonFiniteMoment : public Error {
 public:
  explicit NonFiniteMoment(std::size_t row);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class StudyFailed : public Error {
 public:
  explicit StudyFailed(const std::string& what) : Error("StudyFailed", what) {}
};

}  // namespace mvcreg
