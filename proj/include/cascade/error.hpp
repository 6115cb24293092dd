// Copyright 2026 The Cascade Toolkit Authors
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

namespace cascade {

/// Error categories. They map one-to-one onto the C API status codes and
/// the CLI exit codes.
enum class ErrorKind {
  kUsage,
  kValidation,
  kIo,
  kUpstream,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_usage(const std::string& message) {
  throw Error(ErrorKind::kUsage, message);
}

[[noreturn]] inline void throw_validation(const std::string& message) {
  throw Error(ErrorKind::kValidation, message);
}

[[noreturn]] inline void throw_io(const std::string& message) {
  throw Error(ErrorKind::kIo, message);
}

[[noreturn]] inline void throw_upstream(const std::string& message) {
  throw Error(ErrorKind::kUpstream, message);
}

}  // namespace cascade
