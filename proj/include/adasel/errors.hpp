#pragma once

#include <stdexcept>
#include <string>

namespace adasel {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; message carries the path and 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Trace file mixes goal_met rows and score rows.
class ModeConflictError : public Error {
 public:
  using Error::Error;
};

/// The (input, model) matrix has a hole.
class CompletenessError : public Error {
 public:
  CompletenessError(std::string input_id, std::string model_id)
      : Error("missing trace record for input '" + input_id + "' and model '" +
              model_id + "'"),
        input_id_(std::move(input_id)),
        model_id_(std::move(model_id)) {}
  const std::string& input_id() const { return input_id_; }
  const std::string& model_id() const { return model_id_; }

 private:
  std::string input_id_;
  std::string model_id_;
};

/// A loaded dataset violates an invariant (first violation in the message).
class InvariantError : public Error {
 public:
  using Error::Error;
};

class CriterionModeError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Pearson correlation with a constant argument.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

/// All labels are Failure, so there is no model to start selection from.
class NoViableModelError : public Error {
 public:
  using Error::Error;
};

/// Premodel file unreadable, truncated, or of the wrong schema version.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace adasel
