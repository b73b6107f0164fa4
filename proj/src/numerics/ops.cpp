#include "jointmap/numerics/ops.hpp"

#include <algorithm>
#include <cmath>

#include "jointmap/error.hpp"

namespace jointmap::numerics {

namespace {

void require_finite(const Matrix& m, const char* op) {
  if (!m.all_finite()) throw NumericError(std::string(op) + " produced a non-finite value");
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: cannot multiply " + a.shape_string() + " by " + b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* b_row = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) out_row[j] += aik * b_row[j];
    }
  }
  require_finite(out, "matmul");
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: cannot multiply transpose of " + a.shape_string() + " by " +
                     b.shape_string());
  }
  Matrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* b_row = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      double* out_row = out.row(i).data();
      for (std::size_t j = 0; j < n; ++j) out_row[j] += aki * b_row[j];
    }
  }
  require_finite(out, "matmul_tn");
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: cannot multiply " + a.shape_string() + " by transpose of " +
                     b.shape_string());
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto br = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < ar.size(); ++k) s += ar[k] * br[k];
      out(i, j) = s;
    }
  }
  require_finite(out, "matmul_nt");
  return out;
}

void add_row_broadcast(Matrix& m, const Matrix& bias) {
  if (bias.rows() != 1 || bias.cols() != m.cols()) {
    throw ShapeError("cannot broadcast " + bias.shape_string() + " over " + m.shape_string());
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias(0, c);
  }
}

Matrix column_sums(const Matrix& m) {
  Matrix out(1, m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out(0, c) += row[c];
  }
  return out;
}

Matrix row_softmax(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto in = m.row(r);
    auto o = out.row(r);
    if (in.empty()) continue;
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - peak);
      total += o[c];
    }
    for (double& x : o) x /= total;
  }
  return out;
}

Matrix row_softmax_backward(const Matrix& y, const Matrix& grad_y) {
  if (!y.same_shape(grad_y)) {
    throw ShapeError("row_softmax_backward: " + y.shape_string() + " vs " +
                     grad_y.shape_string());
  }
  Matrix out(y.rows(), y.cols());
  for (std::size_t r = 0; r < y.rows(); ++r) {
    const auto yr = y.row(r);
    const auto gr = grad_y.row(r);
    double dot = 0.0;
    for (std::size_t c = 0; c < yr.size(); ++c) dot += yr[c] * gr[c];
    auto o = out.row(r);
    for (std::size_t c = 0; c < yr.size(); ++c) o[c] = yr[c] * (gr[c] - dot);
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix sigmoid(const Matrix& m) {
  Matrix out = m;
  for (double& x : out.values()) x = sigmoid(x);
  return out;
}

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (double& x : out.values()) x = x > 0.0 ? x : 0.0;
  return out;
}

namespace {

std::vector<double> row_norms(const Matrix& m) {
  std::vector<double> norms(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (double x : m.row(r)) s += x * x;
    norms[r] = std::sqrt(s);
  }
  return norms;
}

}  // namespace

Matrix cosine_rows(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("cosine_rows: " + a.shape_string() + " and " + b.shape_string() +
                     " have different widths");
  }
  const auto na = row_norms(a);
  const auto nb = row_norms(b);
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (na[i] == 0.0) continue;
    const auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      if (nb[j] == 0.0) continue;
      const auto br = b.row(j);
      double dot = 0.0;
      for (std::size_t k = 0; k < ar.size(); ++k) dot += ar[k] * br[k];
      out(i, j) = std::clamp(dot / (na[i] * nb[j]), -1.0, 1.0);
    }
  }
  return out;
}

CosineGrads cosine_rows_backward(const Matrix& a, const Matrix& b, const Matrix& cos,
                                 const Matrix& grad_cos) {
  if (cos.rows() != a.rows() || cos.cols() != b.rows() || !cos.same_shape(grad_cos)) {
    throw ShapeError("cosine_rows_backward: inconsistent shapes");
  }
  const auto na = row_norms(a);
  const auto nb = row_norms(b);
  const std::size_t width = a.cols();
  CosineGrads g{Matrix(a.rows(), width), Matrix(b.rows(), width)};
  // d cos(a_i, b_j) / d a_i = (b_j / |b_j| - cos_ij * a_i / |a_i|) / |a_i|
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (na[i] == 0.0) continue;
    const auto ar = a.row(i);
    auto ga = g.grad_a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      if (nb[j] == 0.0) continue;
      const double d = grad_cos(i, j);
      if (d == 0.0) continue;
      const auto br = b.row(j);
      auto gb = g.grad_b.row(j);
      const double c = cos(i, j);
      for (std::size_t k = 0; k < width; ++k) {
        const double a_hat = ar[k] / na[i];
        const double b_hat = br[k] / nb[j];
        ga[k] += d * (b_hat - c * a_hat) / na[i];
        gb[k] += d * (a_hat - c * b_hat) / nb[j];
      }
    }
  }
  return g;
}

Matrix dropout(const Matrix& m, double p, bool training, Rng* rng, Matrix* mask) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(p));
  }
  if (!training || p == 0.0) {
    if (mask) *mask = Matrix(m.rows(), m.cols(), 1.0);
    return m;
  }
  if (rng == nullptr) throw ConfigError("dropout in training mode requires a generator");
  const double keep_scale = 1.0 / (1.0 - p);
  Matrix out = m;
  Matrix factors(m.rows(), m.cols());
  auto f = factors.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    f[i] = rng->uniform() < p ? 0.0 : keep_scale;
    o[i] *= f[i];
  }
  if (mask) *mask = std::move(factors);
  return out;
}

}  // namespace jointmap::numerics
