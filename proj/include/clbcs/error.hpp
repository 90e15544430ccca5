// Copyright 2026 The clbcs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clbcs {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. `position()` is a character index or a 1-based line
/// number depending on what was being parsed.
class ParseError : public Error {
  public:
    ParseError(const std::string &msg, std::size_t position)
        : Error(msg), position_(position) {}

    std::size_t position() const noexcept { return position_; }

  private:
    std::size_t position_;
};

/// Operands with incompatible qubit counts or lengths.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A precondition on values (probabilities, counts, ranges) was violated.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A cost or gradient became non-finite.
class NumericalError : public Error {
  public:
    using Error::Error;
};

} // namespace clbcs
