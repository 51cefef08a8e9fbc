#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace spopo {

/// Input outside the domain of an operation (bad widths, mismatched grids, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested pump power is at or above the oscillation threshold.
class AboveThresholdError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Mode FWHM asked for on a multi-lobed mode without the envelope flag.
class IllDefinedFwhmError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Loss-inversion produced a non-positive variance.
class InconsistentEfficiencyError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative numerical routine failed; carries the best residual reached.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Malformed configuration; line is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& file, int line, const std::string& msg)
      : std::runtime_error(format(file, line, msg)), file_(file), line_(line) {}
  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& file, int line, const std::string& msg) {
    std::string out = file.empty() ? std::string("<config>") : file;
    if (line > 0) out += ":" + std::to_string(line);
    return out + ": " + msg;
  }
  std::string file_;
  int line_;
};

/// Malformed trace file; offset is the byte position where parsing failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& path, std::uint64_t offset, const std::string& msg)
      : std::runtime_error(path + " @ byte " + std::to_string(offset) + ": " + msg),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace spopo
