// Copyright 2026 The qpvsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qpv {

/// Base class for every error raised by the simulator.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Qubit cap exceeded, entanglement supply exhausted.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Operation on a qubit id that is not (or no longer) in the registry.
class LivenessError : public Error {
 public:
  using Error::Error;
};

/// Malformed argument: non-unitary matrix, incomplete basis, bad range.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A party tried to use information or a system outside its light cone.
/// Always indicates a bug in a strategy, never a protocol failure.
class CausalityViolation : public Error {
 public:
  using Error::Error;
};

/// Scenario or protocol configuration violates an invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The requested signal ordering cannot be computed from what is known.
class InsufficientKnowledge : public Error {
 public:
  using Error::Error;
};

/// Scenario/result file could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qpv
