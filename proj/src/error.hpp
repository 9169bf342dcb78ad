// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#pragma once

#include <stdexcept>
#include <string>

namespace chanpred {

enum class ErrorKind {
  InvalidArgument,  // caller violated a precondition
  Data,             // malformed or inconsistent input data / files
  Io,               // filesystem failure
  Numeric,          // factorization or solve failed after repair
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace chanpred
