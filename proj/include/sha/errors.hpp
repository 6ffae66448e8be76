// Copyright 2026 The SHA Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace sha {

/// Requested allocation exceeds a hard cap (qubit count, enumeration size).
class ResourceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Operands disagree in size (qubit count, parameter count, bitstring length).
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A problem cannot be encoded (e.g. color count not a power of two).
class EncodingError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed configuration, fixture or serialized input.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {
[[noreturn]] inline void fail_range(const std::string &what) {
    throw std::out_of_range(what);
}
} // namespace detail

} // namespace sha
