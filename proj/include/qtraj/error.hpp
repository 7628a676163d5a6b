#pragma once

#include <stdexcept>
#include <string>

namespace qtraj {

// Process exit codes used by the command-line runner.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kCompute = 3,
  kIo = 4,
  kComparisonFail = 5,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual ExitCode exit_code() const noexcept { return ExitCode::kCompute; }
};

// --- configuration ---------------------------------------------------------

class ConfigError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

class ParseError : public ConfigError {
 public:
  ParseError(std::size_t line, const std::string& message)
      : ConfigError("line " + std::to_string(line) + ": " + message), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public ConfigError {
 public:
  ValidationError(std::string invariant, const std::string& message)
      : ConfigError(invariant + ": " + message), invariant_(std::move(invariant)) {}
  [[nodiscard]] const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

// --- computation -----------------------------------------------------------

class ComputeError : public Error {
 public:
  using Error::Error;
};

class ZeroRate : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

class EmptyEnsemble : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

class ZeroMass : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

class BackflowDominant : public ComputeError {
 public:
  BackflowDominant(double fraction, const std::string& message)
      : ComputeError(message), fraction_(fraction) {}
  [[nodiscard]] double fraction() const noexcept { return fraction_; }

 private:
  double fraction_;
};

class EmptyRegion : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

class DomainTooSmall : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

class OutOfDomain : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

class GridMismatch : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

// --- io --------------------------------------------------------------------

class IoError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kIo; }
};

}  // namespace qtraj
