// Copyright 2026 The EvoPose Authors.
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

#ifndef EVOPOSE_ERROR_H_
#define EVOPOSE_ERROR_H_

#include <stdexcept>
#include <string>

namespace evopose {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not line up. The message names the offending dim.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid argument or precondition violation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed configuration; message carries the field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss or prediction.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// I/O failure or corrupted on-disk artifact.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace evopose

#endif  // EVOPOSE_ERROR_H_
