// Copyright 2026 The msd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace msd {

// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A matrix or vector does not have full numerical rank where required.
struct RankDeficient : Error {
  using Error::Error;
};

// Shapes of the inputs do not agree.
struct DimensionMismatch : Error {
  using Error::Error;
};

// A size argument (n, m, trials, ...) is out of range.
struct InvalidSize : Error {
  using Error::Error;
};

// A scalar parameter (delta, lambda, coherence, ...) is out of range.
struct InvalidParameter : Error {
  using Error::Error;
};

// An operation that requires a nonzero vector received the zero vector.
struct ZeroVector : Error {
  using Error::Error;
};

// gamma >= 1: the concentration lower bound is vacuous.
struct GammaTooLarge : Error {
  using Error::Error;
};

// The subspace fills the whole ambient space, so S-perp is trivial.
struct DegenerateSubspace : Error {
  using Error::Error;
};

// A config or data file is syntactically or semantically malformed.
struct ParseError : Error {
  using Error::Error;
};

// A file could not be opened, read, or written.
struct IoError : Error {
  using Error::Error;
};

}  // namespace msd
