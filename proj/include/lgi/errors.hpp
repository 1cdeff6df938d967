// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lgi {

// Root of every error the library throws. The CLI maps subclasses onto exit
// codes, so new errors should derive from one of the three families below.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Wiring and contract violations.
class ShapeMismatch : public Error { public: using Error::Error; };
class EmptyAxis : public Error { public: using Error::Error; };
class EvenKernel : public Error { public: using Error::Error; };
class NonScalarLoss : public Error { public: using Error::Error; };
class IndexOutOfRange : public Error { public: using Error::Error; };
class InvalidArgument : public Error { public: using Error::Error; };
class EmptyQuery : public Error { public: using Error::Error; };
class NInvalid : public Error { public: using Error::Error; };
class EmptyGuide : public Error { public: using Error::Error; };
class LengthMismatch : public Error { public: using Error::Error; };
class EmptyInput : public Error { public: using Error::Error; };

// Data errors: bad corpora, configs and files.
class DataError : public Error { public: using Error::Error; };
class ConfigInvalid : public DataError { public: using DataError::DataError; };
class InvariantViolation : public DataError { public: using DataError::DataError; };

class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::uint64_t byte_offset)
      : DataError(what + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::uint64_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

// Numeric failures: NaN/Inf in values or gradients, diverging training.
class NumericError : public Error { public: using Error::Error; };
class NonFiniteValue : public NumericError { public: using NumericError::NumericError; };

class NonFiniteGradient : public NumericError {
 public:
  explicit NonFiniteGradient(std::string param)
      : NumericError("non-finite gradient in parameter '" + param + "'"),
        param_(std::move(param)) {}
  const std::string& param() const noexcept { return param_; }

 private:
  std::string param_;
};

}  // namespace lgi
