// SPDX-License-Identifier: Apache-2.0
#include "sparray/gradcheck.hpp"
#include "sparray/rng.hpp"
#include "sparray/tensor.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace sparray;

namespace {

Tensor rand_tensor(std::vector<int> shape, Rng& rng, bool rg = true) {
  std::vector<double> v(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& x : v) x = rng.normal();
  return Tensor(std::move(shape), std::move(v), rg);
}

}  // namespace

TEST_CASE("elementwise ops and backward") {
  Tensor x({2}, {1.0, 2.0}, true);
  Tape tape;
  {
    Tape::Scope scope(tape);
    Tensor loss = sum(x * x);
    CHECK(loss.item() == doctest::Approx(5.0));
    tape.backward(loss);
  }
  CHECK(x.grad()[0] == doctest::Approx(2.0));
  CHECK(x.grad()[1] == doctest::Approx(4.0));
}

TEST_CASE("scalar broadcasting") {
  Tensor x({3}, {1.0, 2.0, 3.0}, true);
  Tensor s = Tensor::scalar(2.0, true);
  Tape tape;
  {
    Tape::Scope scope(tape);
    Tensor loss = sum(x * s);
    CHECK(loss.item() == doctest::Approx(12.0));
    tape.backward(loss);
  }
  CHECK(s.grad()[0] == doctest::Approx(6.0));
  CHECK(x.grad()[1] == doctest::Approx(2.0));
}

TEST_CASE("shape mismatch rejected") {
  Tensor a({2}, {1.0, 2.0});
  Tensor b({3}, {1.0, 2.0, 3.0});
  CHECK_THROWS_AS(a + b, ContractViolation);
}

TEST_CASE("unary examples") {
  Tensor x({4}, {-1.0, 0.0, 0.5, 2.0});
  CHECK(leaky_relu(x, 0.1)[0] == doctest::Approx(-0.1));
  CHECK(leaky_relu(x, 0.1)[1] == doctest::Approx(0.0));
  CHECK(leaky_relu(x, 0.1)[3] == doctest::Approx(2.0));
  CHECK(relu(x)[0] == doctest::Approx(0.0));
  CHECK(abs(x)[0] == doctest::Approx(1.0));
  // softplus is overflow-safe and positive
  Tensor big({2}, {-800.0, 800.0});
  Tensor sp = softplus(big);
  CHECK(sp[0] == doctest::Approx(0.0));
  CHECK(sp[1] == doctest::Approx(800.0));
  CHECK(std::isfinite(sp[1]));
}

TEST_CASE("relu subgradient at zero is zero") {
  Tensor x = Tensor::scalar(0.0, true);
  Tape tape;
  {
    Tape::Scope scope(tape);
    Tensor loss = sum(relu(x));
    tape.backward(loss);
  }
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("reductions") {
  Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(sum(x).item() == doctest::Approx(21.0));
  CHECK(mean(x).item() == doctest::Approx(3.5));
  Tensor rows = sum_dim(x, 1);
  CHECK(rows.dim(0) == 2);
  CHECK(rows[0] == doctest::Approx(6.0));
  CHECK(rows[1] == doctest::Approx(15.0));
  Tensor cols = sum_dim(x, 0);
  CHECK(cols.dim(0) == 3);
  CHECK(cols[2] == doctest::Approx(9.0));
  CHECK(max_all(x).item() == doctest::Approx(6.0));
  CHECK(argmax(x) == 5);
}

TEST_CASE("max_all ties route the subgradient to the first maximum") {
  Tensor x({3}, {2.0, 5.0, 5.0}, true);
  Tape tape;
  {
    Tape::Scope scope(tape);
    Tensor loss = max_all(x);
    tape.backward(loss);
  }
  CHECK(x.grad()[1] == doctest::Approx(1.0));
  CHECK(x.grad()[2] == doctest::Approx(0.0));
}

TEST_CASE("quantile linear interpolation with oracle") {
  Tensor x({4}, {4.0, 1.0, 3.0, 2.0});
  // order stats 1,2,3,4; q=0.5 -> index 1.5 -> 2.5
  CHECK(quantile(x, 0.5).item() == doctest::Approx(2.5));
  CHECK(quantile(x, 0.0).item() == doctest::Approx(1.0));
  CHECK(quantile(x, 1.0).item() == doctest::Approx(4.0));
  // q=0.95 over 4 values: index 2.85 -> 3 + 0.85*(4-3)
  CHECK(quantile(x, 0.95).item() == doctest::Approx(3.85));
}

TEST_CASE("quantile gradient matches finite differences") {
  Rng rng(11);
  Tensor x = rand_tensor({9}, rng);
  auto f = [&]() { return quantile(x * x, 0.95); };
  auto report = grad_check(f, {{"x", x}}, 1e-6, 1e-6);
  CHECK(report.pass);
}

TEST_CASE("softmax rows are stochastic and match direct evaluation") {
  Tensor x({2, 3}, {0.3, -1.0, 2.0, 5.0, 5.0, 5.0});
  Tensor p = softmax(x, 1, 2.0);
  for (int r = 0; r < 2; ++r) {
    double s = 0;
    for (int c = 0; c < 3; ++c) s += p[r * 3 + c];
    CHECK(s == doctest::Approx(1.0));
  }
  const double z = std::exp(0.15) + std::exp(-0.5) + std::exp(1.0);
  CHECK(p[0] == doctest::Approx(std::exp(0.15) / z));
  CHECK(p[3] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("softmax gradient") {
  Rng rng(3);
  Tensor x = rand_tensor({4, 3}, rng);
  Tensor w = rand_tensor({4, 3}, rng, false);
  for (int dim : {0, 1}) {
    auto f = [&]() { return sum(softmax(x, dim, 0.7) * w); };
    auto report = grad_check(f, {{"x", x}}, 1e-6, 1e-6);
    CHECK(report.pass);
  }
}

TEST_CASE("structure ops") {
  Tensor x({2, 2}, {1, 2, 3, 4});
  Tensor r = reshape(x, {4});
  CHECK(r.dim(0) == 4);
  Tensor g = gather(r, {3, 0});
  CHECK(g[0] == doctest::Approx(4.0));
  CHECK(g[1] == doctest::Approx(1.0));
  Tensor s = circshift2(x, 1, 0);
  CHECK(s[0] == doctest::Approx(3.0));
  CHECK(s[2] == doctest::Approx(1.0));
  Tensor c = concat0({x, x});
  CHECK(c.ndim() == 3);
  CHECK(c.dim(0) == 2);
  CHECK(c[7] == doctest::Approx(4.0));
}

TEST_CASE("matmul against a hand product with gradient") {
  Tensor a({2, 3}, {1, 2, 3, 4, 5, 6}, true);
  Tensor b({3, 2}, {7, 8, 9, 10, 11, 12}, true);
  Tensor c = matmul(a, b);
  CHECK(c[0] == doctest::Approx(58.0));
  CHECK(c[3] == doctest::Approx(154.0));
  auto f = [&]() { return sum(matmul(a, b) * matmul(a, b)); };
  auto report = grad_check(f, {{"a", a}, {"b", b}}, 1e-5, 1e-6);
  CHECK(report.pass);
}

TEST_CASE("conv2d matches a naive loop and its gradient checks out") {
  Rng rng(5);
  Tensor x = rand_tensor({2, 4, 4}, rng);
  Tensor w = rand_tensor({3, 2, 3, 3}, rng);
  Tensor b = rand_tensor({3}, rng);
  Tensor y = conv2d(x, w, b);
  REQUIRE(y.shape() == std::vector<int>{3, 4, 4});
  for (int co = 0; co < 3; ++co)
    for (int oy = 0; oy < 4; ++oy)
      for (int ox = 0; ox < 4; ++ox) {
        double acc = b[co];
        for (int ci = 0; ci < 2; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int iy = oy + ky - 1, ix = ox + kx - 1;
              if (iy < 0 || iy >= 4 || ix < 0 || ix >= 4) continue;
              acc += x[(ci * 4 + iy) * 4 + ix] * w[((co * 2 + ci) * 3 + ky) * 3 + kx];
            }
        CHECK(y[(co * 4 + oy) * 4 + ox] == doctest::Approx(acc));
      }
  Tensor t = rand_tensor({3, 4, 4}, rng, false);
  auto f = [&]() {
    Tensor d = conv2d(x, w, b) - t;
    return sum(d * d);
  };
  auto report = grad_check(f, {{"x", x}, {"w", w}, {"b", b}}, 1e-6, 1e-6);
  CHECK(report.pass);
}

TEST_CASE("detach cuts the graph") {
  Tensor x = Tensor::scalar(3.0, true);
  Tape tape;
  {
    Tape::Scope scope(tape);
    Tensor loss = sum(detach(x * x) * x);
    tape.backward(loss);
  }
  CHECK(x.grad()[0] == doctest::Approx(9.0));
}

TEST_CASE("f32 mode rounds op results through float") {
  PrecisionScope ps(Precision::f32);
  Tensor a = Tensor::scalar(1.0);
  Tensor b = Tensor::scalar(1e-9);
  Tensor c = a + b;
  CHECK(c.item() == static_cast<double>(static_cast<float>(1.0 + 1e-9)));
  CHECK(c.item() == 1.0);
}

TEST_CASE("f64 mode keeps full precision") {
  Tensor a = Tensor::scalar(1.0);
  Tensor b = Tensor::scalar(1e-9);
  CHECK((a + b).item() == 1.0 + 1e-9);
}
