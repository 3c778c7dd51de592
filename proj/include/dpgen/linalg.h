//
// Copyright 2026 The dpgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPGEN_LINALG_H_
#define DPGEN_LINALG_H_

#include <cstddef>
#include <span>
#include <vector>

namespace dpgen {

using Vector = std::vector<double>;

inline double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

inline double SquaredNorm(std::span<const double> v) { return Dot(v, v); }

// Euclidean norm; exactly 0 for the zero vector.
double L2Norm(std::span<const double> v);

// y += alpha * x
inline void Axpy(double alpha, std::span<const double> x,
                 std::span<double> y) {
  const double* __restrict src = x.data();
  double* __restrict dst = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] += alpha * src[i];
}

void Scale(double alpha, std::span<double> v);

bool AllFinite(std::span<const double> v);

// Non-owning strided view of a dense matrix. Element (r, c) lives at
// data[r * row_stride + c * col_stride].
template <typename T>
class MatrixView {
 public:
  MatrixView(T* data, std::size_t rows, std::size_t cols,
             std::size_t row_stride, std::size_t col_stride)
      : data_(data),
        rows_(rows),
        cols_(cols),
        row_stride_(row_stride),
        col_stride_(col_stride) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * row_stride_ + c * col_stride_];
  }

 private:
  T* data_;
  std::size_t rows_;
  std::size_t cols_;
  std::size_t row_stride_;
  std::size_t col_stride_;
};

}  // namespace dpgen

#endif  // DPGEN_LINALG_H_
