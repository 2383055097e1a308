#pragma once

#include <stdexcept>
#include <string>

namespace parcel {

/// Error taxonomy. The numeric value doubles as the CLI exit code.
enum class ErrorKind : int {
  invalid_argument = 2,
  data = 3,
  model = 4,
  io = 5,
  training = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

/// Input data violates a documented contract (missing cells, single class, leakage).
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

struct ModelError : Error {
  explicit ModelError(const std::string& what) : Error(ErrorKind::model, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Optimisation diverged or no usable ensemble member could be fitted.
struct TrainingError : Error {
  explicit TrainingError(const std::string& what) : Error(ErrorKind::training, what) {}
};

}  // namespace parcel
