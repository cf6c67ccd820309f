#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kinesphere {

enum class ErrorCode {
  MalformedXml,
  SchemaViolation,
  LabelingError,
  DisconnectedCore,
  UnknownLabel,
  ZeroDirection,
  UnknownOrigin,
  InvalidSizeCount,
  DuplicateEntry,
  UnknownKId,
  SupportMismatch,
  LimitViolation,
  SizeOverflow,
  NoSuchEntry,
  JointConflict,
  FormatError,
  IntegrityError,
  SyntaxError,
  UnknownDirectionName,
  NoLocomotion,
  GroundProjectionDegenerate,
  MultipleTranslations,
  InstallFailure,
  UnknownPlatform,
  UnknownSession,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure the library reports. The code is
/// machine-readable and is what the CLI and service surface verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by lookups asking for a size past the highest stored one.
class SizeOverflowError : public Error {
 public:
  SizeOverflowError(int kmax, const std::string& message)
      : Error(ErrorCode::SizeOverflow, message), kmax_(kmax) {}

  int kmax() const noexcept { return kmax_; }

 private:
  int kmax_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int column, const std::string& message)
      : Error(ErrorCode::SyntaxError,
              std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class JointConflictError : public Error {
 public:
  JointConflictError(std::size_t joint_index, const std::string& message)
      : Error(ErrorCode::JointConflict, message), joint_index_(joint_index) {}

  std::size_t joint_index() const noexcept { return joint_index_; }

 private:
  std::size_t joint_index_;
};

}  // namespace kinesphere
