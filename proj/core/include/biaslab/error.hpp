// Copyright 2026 The BiasLab Authors.
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

namespace biaslab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed files, violated preconditions, inconsistent shapes.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures (missing or unwritable files).
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite losses and other numerical breakdowns.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace biaslab
