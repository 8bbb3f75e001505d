/* Copyright 2026 The Bicompress Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BICOMPRESS_ERROR_HPP_
#define BICOMPRESS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace bicompress {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Dataset files are missing or hold values outside the documented contract.
class DatasetError : public Error {
 public:
  using Error::Error;
};

// Checkpoint file is unreadable, truncated or from another format version.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Training produced NaN or Inf.
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

inline void Require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace bicompress

#endif  // BICOMPRESS_ERROR_HPP_
