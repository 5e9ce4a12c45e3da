// Copyright 2026 The MSD Authors.
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

#ifndef MSD_CORE_ERROR_HPP_
#define MSD_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace msd {

enum class ErrorKind {
  kIo,        // file missing / unreadable / unwritable
  kFormat,    // malformed input file
  kArgument,  // bad parameter or configuration
  kState,     // operation applied in an invalid order
  kInternal,  // invariant violation inside the library
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void FailIo(const std::string& what) {
  throw Error(ErrorKind::kIo, what);
}
[[noreturn]] inline void FailFormat(const std::string& what) {
  throw Error(ErrorKind::kFormat, what);
}
[[noreturn]] inline void FailArgument(const std::string& what) {
  throw Error(ErrorKind::kArgument, what);
}
[[noreturn]] inline void FailState(const std::string& what) {
  throw Error(ErrorKind::kState, what);
}
[[noreturn]] inline void FailInternal(const std::string& what) {
  throw Error(ErrorKind::kInternal, what);
}

}  // namespace msd

#endif  // MSD_CORE_ERROR_HPP_
