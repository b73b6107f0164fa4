#include <cmath>
#include <vector>

#include "doctest.h"
#include "jointmap/error.hpp"
#include "jointmap/numerics/gradcheck.hpp"
#include "jointmap/numerics/matrix.hpp"
#include "jointmap/numerics/ops.hpp"
#include "jointmap/numerics/param_store.hpp"
#include "jointmap/numerics/random.hpp"

using namespace jointmap;
using namespace jointmap::numerics;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (double& x : m.values()) x = rng.uniform(-scale, scale);
  return m;
}

}  // namespace

TEST_CASE("matrix construction validates sizes") {
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), ShapeError);
  const Matrix m{{1, 2, 3}, {4, 5, 6}};
  CHECK(m.rows() == 2);
  CHECK(m(1, 2) == 6);
  CHECK(m.transposed()(2, 1) == 6);
  CHECK(m.slice_rows(1, 2) == Matrix{{4, 5, 6}});
}

TEST_CASE("matmul") {
  const Matrix a{{1, 2}, {3, 4}};
  CHECK(matmul(Matrix::identity(2), a) == a);
  CHECK(matmul(a, Matrix{{0}, {0}}) == Matrix{{0}, {0}});
  CHECK(matmul(a, Matrix{{5}, {6}}) == Matrix{{17}, {39}});

  try {
    matmul(a, Matrix(3, 1));
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x2") != std::string::npos);
    CHECK(msg.find("3x1") != std::string::npos);
  }
}

TEST_CASE("transposed products agree with explicit transposes") {
  Rng rng(3);
  const Matrix a = random_matrix(4, 3, rng);
  const Matrix b = random_matrix(4, 5, rng);
  const Matrix c = random_matrix(6, 3, rng);
  const Matrix tn = matmul_tn(a, b);
  const Matrix ref_tn = matmul(a.transposed(), b);
  const Matrix nt = matmul_nt(a, c);
  const Matrix ref_nt = matmul(a, c.transposed());
  for (std::size_t i = 0; i < tn.size(); ++i) CHECK(tn.values()[i] == doctest::Approx(ref_tn.values()[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < nt.size(); ++i) CHECK(nt.values()[i] == doctest::Approx(ref_nt.values()[i]).epsilon(1e-12));
}

TEST_CASE("row_softmax") {
  CHECK(row_softmax(Matrix{{0, 0}}) == Matrix{{0.5, 0.5}});
  const Matrix y = row_softmax(Matrix{{0, std::log(3.0)}});
  CHECK(y(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(y(0, 1) == doctest::Approx(0.75).epsilon(1e-15));

  const std::vector<long double> x{2.0L, -1.0L, 0.5L};
  long double z = 0;
  for (auto v : x) z += std::exp(v);
  const Matrix s = row_softmax(Matrix{{2.0, -1.0, 0.5}});
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(s(0, j) - static_cast<double>(std::exp(x[j]) / z)) < 1e-15);
  }
}

TEST_CASE("row_softmax rows sum to one even for large entries") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix m = random_matrix(5, 7, rng, 1e3);
    const Matrix y = row_softmax(m);
    REQUIRE(y.all_finite());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double s = 0;
      for (double v : y.row(r)) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("sigmoid and relu") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(relu(Matrix{{-3.2, 3.2}}) == Matrix{{0.0, 3.2}});
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-40, 40);
    CHECK(sigmoid(x) + sigmoid(-x) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(800.0) <= 1.0);
}

TEST_CASE("cosine_rows") {
  const Matrix a{{1, 2}};
  CHECK(cosine_rows(a, a)(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_rows(Matrix{{1, 0}}, Matrix{{0, 1}})(0, 0) == 0.0);
  CHECK(cosine_rows(a, Matrix{{3, 4}})(0, 0) ==
        doctest::Approx(11.0 / (std::sqrt(5.0) * 5.0)).epsilon(1e-14));
  const Matrix z = cosine_rows(Matrix{{0, 0}, {1, 1}}, Matrix{{2, 3}, {0, 0}});
  CHECK(z(0, 0) == 0.0);
  CHECK(z(0, 1) == 0.0);
  CHECK(z(1, 1) == 0.0);
  CHECK_THROWS_AS(cosine_rows(Matrix(1, 2), Matrix(1, 3)), ShapeError);

  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix m = cosine_rows(random_matrix(3, 4, rng), random_matrix(5, 4, rng));
    for (double v : m.values()) CHECK(std::abs(v) <= 1.0 + 1e-9);
  }
}

TEST_CASE("backward rules match finite differences") {
  Rng rng(21);
  const double h = 1e-6;
  SUBCASE("softmax") {
    const Matrix x = random_matrix(2, 4, rng);
    const Matrix g = random_matrix(2, 4, rng);
    const Matrix dx = row_softmax_backward(row_softmax(x), g);
    for (std::size_t i = 0; i < x.size(); ++i) {
      Matrix p = x, m = x;
      p.values()[i] += h;
      m.values()[i] -= h;
      double fp = 0, fm = 0;
      const Matrix yp = row_softmax(p), ym = row_softmax(m);
      for (std::size_t k = 0; k < g.size(); ++k) {
        fp += g.values()[k] * yp.values()[k];
        fm += g.values()[k] * ym.values()[k];
      }
      CHECK(dx.values()[i] == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-6));
    }
  }
  SUBCASE("cosine") {
    const Matrix a = random_matrix(3, 4, rng);
    const Matrix b = random_matrix(2, 4, rng);
    const Matrix g = random_matrix(3, 2, rng);
    const auto grads = cosine_rows_backward(a, b, cosine_rows(a, b), g);
    const auto objective = [&](const Matrix& aa, const Matrix& bb) {
      const Matrix c = cosine_rows(aa, bb);
      double s = 0;
      for (std::size_t k = 0; k < c.size(); ++k) s += g.values()[k] * c.values()[k];
      return s;
    };
    for (std::size_t i = 0; i < a.size(); ++i) {
      Matrix p = a, m = a;
      p.values()[i] += h;
      m.values()[i] -= h;
      CHECK(grads.grad_a.values()[i] ==
            doctest::Approx((objective(p, b) - objective(m, b)) / (2 * h)).epsilon(1e-6));
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      Matrix p = b, m = b;
      p.values()[i] += h;
      m.values()[i] -= h;
      CHECK(grads.grad_b.values()[i] ==
            doctest::Approx((objective(a, p) - objective(a, m)) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("dropout") {
  Rng rng(4);
  const Matrix m(3, 3, 2.0);
  CHECK(dropout(m, 0.0, true, &rng) == m);
  CHECK(dropout(m, 0.7, false, nullptr) == m);
  CHECK_THROWS_AS(dropout(m, 1.0, true, &rng), ConfigError);
  CHECK_THROWS_AS(dropout(m, -0.1, true, &rng), ConfigError);

  const Matrix ones(1000, 1000, 1.0);
  Matrix mask;
  const Matrix out = dropout(ones, 0.5, true, &rng, &mask);
  double sum = 0;
  for (double v : out.values()) {
    CHECK((v == 0.0 || v == 2.0));
    sum += v;
  }
  CHECK(std::abs(sum / static_cast<double>(out.size()) - 1.0) < 0.01);
  CHECK(mask == out);
}

TEST_CASE("adam_step") {
  SUBCASE("missing gradient") {
    ParamStore store;
    store.add("w", Matrix{{1.0}});
    CHECK_THROWS_AS(adam_step(store, 0.1), ConsistencyError);
  }
  SUBCASE("zero gradient is a fixed point") {
    ParamStore store;
    store.add("w", Matrix{{1.5, -2.0}});
    auto g = store.make_grad_buffer();
    store.accumulate(g);
    adam_step(store, 0.1);
    CHECK(store[0].value == Matrix{{1.5, -2.0}});
    CHECK(store.step_count() == 1);
    CHECK_FALSE(store[0].grad_ready);
  }
  SUBCASE("first step moves by lr against the gradient sign") {
    ParamStore store;
    store.add("w", Matrix{{0.0, 0.0}});
    GradBuffer g({Matrix{{3.0, -0.25}}});
    store.accumulate(g);
    adam_step(store, 0.01);
    CHECK(store[0].value(0, 0) == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(store[0].value(0, 1) == doctest::Approx(0.01).epsilon(1e-6));
  }
  SUBCASE("two steps against a hand-stepped recursion") {
    ParamStore store;
    store.add("w", Matrix{{0.5}});
    const double lr = 0.1;
    long double x = 0.5L, m = 0, v = 0;
    for (int t = 1; t <= 2; ++t) {
      GradBuffer g({Matrix{{1.0}}});
      store.accumulate(g);
      adam_step(store, lr);
      m = 0.9L * m + 0.1L * 1.0L;
      v = 0.999L * v + 0.001L * 1.0L;
      const long double mh = m / (1 - std::pow(0.9L, t));
      const long double vh = v / (1 - std::pow(0.999L, t));
      x -= lr * mh / (std::sqrt(vh) + 1e-8L);
    }
    CHECK(std::abs(store[0].value(0, 0) - static_cast<double>(x)) < 1e-14);
  }
  SUBCASE("bit-reproducible") {
    auto run = [] {
      Rng rng(77);
      ParamStore store;
      store.add("a", random_matrix(3, 2, rng));
      store.add("b", random_matrix(1, 4, rng));
      for (int s = 0; s < 20; ++s) {
        auto g = store.make_grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          for (double& x : g[i].values()) x = rng.normal();
        }
        store.accumulate(g);
        adam_step(store, 1e-3);
      }
      return std::vector<Matrix>{store[0].value, store[1].value};
    };
    CHECK(run() == run());
  }
}

TEST_CASE("param store bookkeeping") {
  ParamStore store;
  store.add("a", Matrix(2, 3));
  CHECK_THROWS_AS(store.add("a", Matrix(1, 1)), ConfigError);
  CHECK(store.index_of("a") == 0);
  CHECK_THROWS_AS(store.index_of("b"), LookupError);
  CHECK(store.parameter_count() == 6);
  GradBuffer wrong({Matrix(3, 2)});
  CHECK_THROWS_AS(store.accumulate(wrong), ShapeError);
}

TEST_CASE("check_gradients") {
  Rng rng(8);
  SUBCASE("quadratic") {
    ParamStore store;
    store.add("x", random_matrix(2, 3, rng));
    const LossClosure loss = [](ParamStore& s, bool with_grad) {
      double f = 0;
      for (double v : s[0].value.values()) f += 0.5 * v * v;
      if (with_grad) s.accumulate(GradBuffer({s[0].value}));
      return f;
    };
    const auto report = check_gradients(loss, store, {1e-8, 1e-4, 1e-6});
    CHECK(report.passed);
    CHECK(report.worst() < 1e-8);
  }
  SUBCASE("constant") {
    ParamStore store;
    store.add("x", random_matrix(2, 2, rng));
    const LossClosure loss = [](ParamStore& s, bool with_grad) {
      if (with_grad) s.accumulate(s.make_grad_buffer());
      return 0.0;
    };
    const auto report = check_gradients(loss, store);
    CHECK(report.passed);
    CHECK(report.params[0].max_abs_analytic == 0.0);
  }
  SUBCASE("wrong gradient fails") {
    ParamStore store;
    store.add("x", Matrix{{1.0, 2.0}});
    const LossClosure loss = [](ParamStore& s, bool with_grad) {
      const auto v = s[0].value.values();
      if (with_grad) s.accumulate(GradBuffer({Matrix{{2 * v[0], v[1]}}}));
      return v[0] * v[0] + v[1] * v[1];
    };
    CHECK_FALSE(check_gradients(loss, store).passed);
  }
  SUBCASE("non-deterministic closure") {
    ParamStore store;
    store.add("x", Matrix{{1.0}});
    int calls = 0;
    const LossClosure loss = [&calls](ParamStore& s, bool with_grad) {
      if (with_grad) s.accumulate(s.make_grad_buffer());
      return static_cast<double>(++calls);
    };
    CHECK_THROWS_AS(check_gradients(loss, store), ProtocolError);
  }
}

TEST_CASE("rng streams") {
  Rng a(1), b(1);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  Rng c(1);
  const Rng f1 = c.fork(1), f2 = c.fork(2);
  CHECK(Rng(f1).next() != Rng(f2).next());
  Rng u(2);
  for (int i = 0; i < 1000; ++i) {
    const auto k = u.uniform_index(7);
    CHECK(k < 7);
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
  }
}
