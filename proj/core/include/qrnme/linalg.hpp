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

// Dense complex matrices for small dimensions (d <= 16).
//
// Storage is row-major everywhere: entry (i, j) lives at data()[i * cols + j].
// All free functions are pure and never mutate their arguments.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace qrnme::linalg {

using Complex = std::complex<double>;

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols);
  CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  // Row-major nested initializer: CMatrix{{1, 0}, {0, 1}}.
  CMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static CMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static CMatrix identity(std::size_t n);
  static CMatrix diag(std::span<const double> values);
  // |i><j| in dimension n.
  static CMatrix unit(std::size_t n, std::size_t i, std::size_t j);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  CMatrix& operator+=(const CMatrix& other);
  CMatrix& operator-=(const CMatrix& other);
  CMatrix& operator*=(Complex scalar);

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a);
CMatrix operator*(CMatrix a, Complex s);
CMatrix operator*(Complex s, CMatrix a);
// Matrix product; same as matmul.
CMatrix operator*(const CMatrix& a, const CMatrix& b);

CMatrix matmul(const CMatrix& a, const CMatrix& b);
CMatrix adjoint(const CMatrix& a);
CMatrix transpose(const CMatrix& a);
CMatrix conj(const CMatrix& a);
CMatrix commutator(const CMatrix& a, const CMatrix& b);
CMatrix anticommutator(const CMatrix& a, const CMatrix& b);
CMatrix kron(const CMatrix& a, const CMatrix& b);

Complex trace(const CMatrix& a);
double frobenius_norm(const CMatrix& a);
double frobenius_norm_sq(const CMatrix& a);
// Maximum absolute column sum.
double one_norm(const CMatrix& a);
double max_abs(const CMatrix& a);
// Largest |a_ij - conj(a_ji)|.
double hermiticity_defect(const CMatrix& a);
bool is_hermitian(const CMatrix& a, double tol = 1e-10);

// Matrix-vector product on a flat complex vector.
std::vector<Complex> apply(const CMatrix& a, std::span<const Complex> v);

struct HermEig {
  std::vector<double> eigenvalues;  // ascending
  CMatrix eigenvectors;             // unitary; column k pairs with eigenvalues[k]
};

// Cyclic Jacobi. Throws DimensionError for non-square input and
// InvariantError when the input is not Hermitian within 1e-10 (scaled by the
// largest entry when that exceeds one).
HermEig herm_eig(const CMatrix& a);
std::vector<double> herm_eigenvalues(const CMatrix& a);

// Scaling-and-squaring with a truncated Taylor series.
CMatrix expm(const CMatrix& a);

}  // namespace qrnme::linalg
