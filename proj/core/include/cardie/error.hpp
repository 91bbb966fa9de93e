#pragma once

#include <stdexcept>
#include <string>

namespace cardie {

/// Coarse failure category; the CLI maps it to a process exit code.
enum class ErrorKind {
  config = 2,   ///< bad arguments, bad configuration, violated preconditions on parameters
  data = 3,     ///< unreadable, malformed or inconsistent input data
  numeric = 4,  ///< a computation could not produce a usable result
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  /// Short machine-readable tag, e.g. "schema" or "integrity".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string& m) : Error(ErrorKind::config, "argument", m) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorKind::config, "config", m) {}
};
struct SchemaError : Error {
  explicit SchemaError(const std::string& m) : Error(ErrorKind::data, "schema", m) {}
};
struct IntegrityError : Error {
  explicit IntegrityError(const std::string& m) : Error(ErrorKind::data, "integrity", m) {}
};
struct PreconditionError : Error {
  explicit PreconditionError(const std::string& m) : Error(ErrorKind::data, "precondition", m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorKind::data, "io", m) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(ErrorKind::numeric, "numeric", m) {}
};

/// Raised when an image cannot be decoded; carries the manifest entry id.
class DecodeError : public Error {
 public:
  DecodeError(std::string entry_id, const std::string& message);
  const std::string& entry_id() const noexcept { return entry_id_; }

 private:
  std::string entry_id_;
};

}  // namespace cardie
