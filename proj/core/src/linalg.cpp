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

#include "qrnme/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qrnme/errors.hpp"

namespace qrnme::linalg {

namespace {

void require_same_shape(const CMatrix& a, const CMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

void require_square_pair(const CMatrix& a, const CMatrix& b, const char* op) {
  if (!a.is_square() || !b.is_square() || a.rows() != b.rows()) {
    throw DimensionError(std::string(op) + ": operands must be square with equal size");
  }
}

constexpr double kJacobiTol = 1e-12;
constexpr int kJacobiMaxSweeps = 100;
constexpr double kHermitianTol = 1e-10;

}  // namespace

CMatrix::CMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("CMatrix: entry count " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
  }
}

CMatrix::CMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw DimensionError("CMatrix: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::diag(std::span<const double> values) {
  CMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

CMatrix CMatrix::unit(std::size_t n, std::size_t i, std::size_t j) {
  CMatrix m(n, n);
  m(i, j) = 1.0;
  return m;
}

CMatrix& CMatrix::operator+=(const CMatrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

CMatrix& CMatrix::operator*=(Complex scalar) {
  for (auto& x : data_) x *= scalar;
  return *this;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator-(CMatrix a) { return a *= -1.0; }
CMatrix operator*(CMatrix a, Complex s) { return a *= s; }
CMatrix operator*(Complex s, CMatrix a) { return a *= s; }
CMatrix operator*(const CMatrix& a, const CMatrix& b) { return matmul(a, b); }

CMatrix matmul(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) +
                         " and " + std::to_string(b.rows()) + " differ");
  }
  CMatrix c(a.rows(), b.cols());
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < p; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

CMatrix adjoint(const CMatrix& a) {
  CMatrix r(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = std::conj(a(i, j));
  return r;
}

CMatrix transpose(const CMatrix& a) {
  CMatrix r(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
  return r;
}

CMatrix conj(const CMatrix& a) {
  CMatrix r = a;
  for (auto& x : r.data()) x = std::conj(x);
  return r;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  require_square_pair(a, b, "commutator");
  return matmul(a, b) - matmul(b, a);
}

CMatrix anticommutator(const CMatrix& a, const CMatrix& b) {
  require_square_pair(a, b, "anticommutator");
  return matmul(a, b) + matmul(b, a);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex aij = a(i, j);
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return r;
}

Complex trace(const CMatrix& a) {
  if (!a.is_square()) throw DimensionError("trace: matrix is not square");
  Complex t{};
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

double frobenius_norm_sq(const CMatrix& a) {
  double s = 0.0;
  for (const auto& x : a.data()) s += std::norm(x);
  return s;
}

double frobenius_norm(const CMatrix& a) { return std::sqrt(frobenius_norm_sq(a)); }

double one_norm(const CMatrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) col += std::abs(a(i, j));
    best = std::max(best, col);
  }
  return best;
}

double max_abs(const CMatrix& a) {
  double m = 0.0;
  for (const auto& x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

double hermiticity_defect(const CMatrix& a) {
  if (!a.is_square()) throw DimensionError("hermiticity_defect: matrix is not square");
  double d = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      d = std::max(d, std::abs(a(i, j) - std::conj(a(j, i))));
  return d;
}

bool is_hermitian(const CMatrix& a, double tol) {
  return a.is_square() && hermiticity_defect(a) <= tol;
}

std::vector<Complex> apply(const CMatrix& a, std::span<const Complex> v) {
  if (a.cols() != v.size()) throw DimensionError("apply: vector length mismatch");
  std::vector<Complex> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Complex acc{};
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

HermEig herm_eig(const CMatrix& input) {
  if (!input.is_square()) throw DimensionError("herm_eig: matrix is not square");
  const double scale = std::max(1.0, max_abs(input));
  if (hermiticity_defect(input) > kHermitianTol * scale) {
    throw InvariantError("herm_eig: input is not Hermitian");
  }
  const std::size_t n = input.rows();
  CMatrix a = input;
  for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();
  CMatrix v = CMatrix::identity(n);

  auto off_norm_sq = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return s;
  };

  const double tol_sq = (kJacobiTol * scale) * (kJacobiTol * scale);
  for (int sweep = 0; sweep < kJacobiMaxSweeps && off_norm_sq() > tol_sq; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag == 0.0) continue;
        // Rotate a(p, q) onto the positive real axis with a diagonal phase on
        // index q, then annihilate it with a real Givens rotation.
        const Complex phase = a(p, q) / mag;
        for (std::size_t k = 0; k < n; ++k) {
          a(k, q) *= std::conj(phase);
          v(k, q) *= std::conj(phase);
        }
        for (std::size_t k = 0; k < n; ++k) a(q, k) *= phase;

        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x).real() < a(y, y).real();
  });
  HermEig out;
  out.eigenvalues.resize(n);
  out.eigenvectors = CMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

std::vector<double> herm_eigenvalues(const CMatrix& a) { return herm_eig(a).eigenvalues; }

CMatrix expm(const CMatrix& input) {
  if (!input.is_square()) throw DimensionError("expm: matrix is not square");
  const std::size_t n = input.rows();
  const double norm = one_norm(input);
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const double scale = std::ldexp(1.0, -squarings);
  const CMatrix a = input * Complex{scale, 0.0};

  CMatrix sum = CMatrix::identity(n);
  CMatrix term = CMatrix::identity(n);
  for (int k = 1; k < 64; ++k) {
    term = matmul(term, a) * Complex{1.0 / k, 0.0};
    sum += term;
    if (one_norm(term) < 1e-16 * std::max(1.0, one_norm(sum))) break;
  }
  for (int s = 0; s < squarings; ++s) sum = matmul(sum, sum);
  return sum;
}

}  // namespace qrnme::linalg
