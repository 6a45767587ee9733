// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace gaze {

enum class ErrorKind {
  kRange,                 // angle or index outside its documented range
  kInvariant,             // a type invariant (unit norm, dimensions) is violated
  kSingular,              // antipodal slerp, vanishing normalization
  kEmptyRequest,
  kConfiguration,
  kShape,
  kDegenerate,            // normalization of a zero vector
  kNonpositiveDenominator,
  kNonFinite,
  kUndefinedRank,
  kIo,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace gaze
