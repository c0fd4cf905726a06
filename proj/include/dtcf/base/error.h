// Copyright (c) 2026 DTCF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DTCF_BASE_ERROR_H_
#define DTCF_BASE_ERROR_H_

#include <stdexcept>
#include <string>

namespace dtcf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes or mismatched layer dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters, configuration keys or preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a function (log/sqrt of negatives, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Training loss became NaN or exceeded the divergence bound.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// File system failures and malformed files.
class IoError : public Error {
 public:
  using Error::Error;
};

// Data references that cannot be resolved (missing utterance ids, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace dtcf

#endif  // DTCF_BASE_ERROR_H_
