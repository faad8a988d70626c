// Copyright 2026 The qrnme Authors
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

namespace qrnme {

// Shape or dimension disagreement between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A density matrix (or Hamiltonian) failed its Hermiticity / trace /
// positivity checks.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The decay-rate denominator vanished (pole of the non-Markovian rate).
class SingularPointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Tr[A A^dagger] vanished while normalizing a network output into a state.
class DegenerateOutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss during training.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

// Malformed, mismatched or inconsistent dataset / checkpoint content.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qrnme
