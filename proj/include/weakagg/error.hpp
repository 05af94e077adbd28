// Copyright 2026 The weakagg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace weakagg {

enum class ErrorKind {
  Shape,
  Numeric,
  Parse,
  Format,
  Range,
  Duplicate,
  EmptyBag,
  InsufficientData,
  Lookup,
  Config,
  Integrity,
  Io,
  Precondition,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Range: return "range error";
    case ErrorKind::Duplicate: return "duplicate error";
    case ErrorKind::EmptyBag: return "empty-bag error";
    case ErrorKind::InsufficientData: return "insufficient-data error";
    case ErrorKind::Lookup: return "lookup error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Integrity: return "integrity error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Precondition: return "precondition error";
  }
  return "error";
}

/// Every failure raised by the library. `kind()` lets callers (the CLI in
/// particular) dispatch without a catch clause per subclass.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace weakagg
