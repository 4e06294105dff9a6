// Copyright 2026 The Horizon Authors
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

#include "horizon/matrix.hpp"

#include "horizon/error.hpp"

namespace horizon {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw Error(ErrorKind::ShapeMismatch, "matmul inner dimensions must agree");
    }
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
    return c;
}

Matrix slice_columns(const Matrix& m, std::size_t col0, std::size_t width) {
    Matrix out(m.rows, width);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* src = m.row(r) + col0;
        double* dst = out.row(r);
        for (std::size_t c = 0; c < width; ++c) {
            dst[c] = src[c];
        }
    }
    return out;
}

void paste_columns(Matrix& dst, const Matrix& src, std::size_t col0) {
    for (std::size_t r = 0; r < src.rows; ++r) {
        const double* s = src.row(r);
        double* d = dst.row(r) + col0;
        for (std::size_t c = 0; c < src.cols; ++c) {
            d[c] = s[c];
        }
    }
}

} // namespace horizon
