// Copyright 2026 The Intercomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INTERCOMM_ERROR_H_
#define INTERCOMM_ERROR_H_

#include <stdexcept>
#include <string>

namespace intercomm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed transcripts, patterns, or turn sequences.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration; reported before any conversation runs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A generation or scoring backend failed after exhausting its retries.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Payoff estimates were requested from a node that has none.
class EstimateError : public Error {
 public:
  using Error::Error;
};

}  // namespace intercomm

#endif  // INTERCOMM_ERROR_H_
