// Copyright 2026 The vlproto Authors
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

#include <stdexcept>
#include <string>

namespace vlproto {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data or arguments. The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Structural problem in an on-disk file (magic, version, truncation, shape).
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

/// A value violates a documented invariant (non-finite, out of range,
/// duplicate id, bad parameter).
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

/// Operating-system level read or write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A class could not be distilled (e.g. too few samples after filtering).
class DistillError : public Error {
 public:
  using Error::Error;
};

}  // namespace vlproto
