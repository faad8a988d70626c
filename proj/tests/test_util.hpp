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

#include <gtest/gtest.h>

#include <cstdint>
#include <random>

#include "qrnme/linalg.hpp"

namespace qrnme::testing {

using linalg::CMatrix;
using linalg::Complex;

inline CMatrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng,
                             double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  CMatrix m(r, c);
  for (auto& x : m.data()) x = {n(rng), n(rng)};
  return m;
}

inline CMatrix random_hermitian(std::size_t d, std::mt19937_64& rng) {
  const CMatrix a = random_matrix(d, d, rng);
  return (a + linalg::adjoint(a)) * Complex{0.5, 0.0};
}

// Mixed state G G^+ / Tr.
inline CMatrix random_density(std::size_t d, std::mt19937_64& rng) {
  const CMatrix g = random_matrix(d, d, rng);
  CMatrix p = g * linalg::adjoint(g);
  return p * Complex{1.0 / linalg::trace(p).real(), 0.0};
}

inline double max_diff(const CMatrix& a, const CMatrix& b) { return linalg::max_abs(a - b); }

}  // namespace qrnme::testing
