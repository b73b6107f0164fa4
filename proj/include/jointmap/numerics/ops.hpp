#pragma once

#include <vector>

#include "jointmap/numerics/matrix.hpp"
#include "jointmap/numerics/random.hpp"

namespace jointmap::numerics {

// a * b. Throws ShapeError when a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// Adds row vector `bias` (1 x cols) to every row of m.
void add_row_broadcast(Matrix& m, const Matrix& bias);
// Column sums as a 1 x cols matrix.
Matrix column_sums(const Matrix& m);

Matrix row_softmax(const Matrix& m);
// Given y = row_softmax(x) and dL/dy, returns dL/dx.
Matrix row_softmax_backward(const Matrix& y, const Matrix& grad_y);

double sigmoid(double x);
Matrix sigmoid(const Matrix& m);
Matrix relu(const Matrix& m);

// Pairwise cosine similarity: out(i, j) = cos(a_i, b_j). Rows with zero
// norm have similarity 0 with everything.
Matrix cosine_rows(const Matrix& a, const Matrix& b);

struct CosineGrads {
  Matrix grad_a;
  Matrix grad_b;
};
// Backward rule for cosine_rows given its output and dL/dout.
CosineGrads cosine_rows_backward(const Matrix& a, const Matrix& b, const Matrix& cos,
                                 const Matrix& grad_cos);

// Inverted dropout. In training mode each entry survives with probability
// 1 - p and is scaled by 1 / (1 - p); `mask` receives the per-entry factor
// (0 or 1 / (1 - p)) when non-null. Evaluation mode is the identity.
Matrix dropout(const Matrix& m, double p, bool training, Rng* rng, Matrix* mask = nullptr);

}  // namespace jointmap::numerics
