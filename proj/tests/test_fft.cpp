// SPDX-License-Identifier: Apache-2.0
#include "sparray/ctensor.hpp"
#include "sparray/gradcheck.hpp"
#include "sparray/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace sparray;

namespace {

CTensor rand_ctensor(int h, int w, Rng& rng, bool rg = false) {
  std::vector<double> re(static_cast<std::size_t>(h) * w), im(re.size());
  for (auto& v : re) v = rng.normal();
  for (auto& v : im) v = rng.normal();
  return CTensor(Tensor({h, w}, std::move(re), rg), Tensor({h, w}, std::move(im), rg));
}

// Direct O(n^4) DFT, the independent oracle for the FFT backend.
std::vector<std::complex<double>> naive_dft2(const CTensor& a, int sign) {
  const int h = a.shape()[0], w = a.shape()[1];
  std::vector<std::complex<double>> out(static_cast<std::size_t>(h) * w);
  for (int ky = 0; ky < h; ++ky)
    for (int kx = 0; kx < w; ++kx) {
      std::complex<double> acc = 0.0;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double ph = sign * 2.0 * M_PI *
                            (static_cast<double>(ky) * y / h + static_cast<double>(kx) * x / w);
          acc += std::complex<double>(a.re[y * w + x], a.im[y * w + x]) *
                 std::exp(std::complex<double>(0.0, ph));
        }
      out[static_cast<std::size_t>(ky) * w + kx] = acc;
    }
  return out;
}

double cdot_re(const CTensor& a, const CTensor& b) {
  double s = 0;
  for (std::int64_t i = 0; i < a.size(); ++i) s += a.re[i] * b.re[i] + a.im[i] * b.im[i];
  return s;
}

}  // namespace

TEST_CASE("fft2 matches the direct DFT") {
  Rng rng(17);
  for (int n : {4, 7, 8}) {
    CTensor a = rand_ctensor(n, n, rng);
    CTensor f = fft2(a);
    const auto oracle = naive_dft2(a, -1);
    for (std::int64_t i = 0; i < f.size(); ++i) {
      CHECK(f.re[i] == doctest::Approx(oracle[static_cast<std::size_t>(i)].real()).epsilon(1e-10));
      CHECK(f.im[i] == doctest::Approx(oracle[static_cast<std::size_t>(i)].imag()).epsilon(1e-10));
    }
  }
}

TEST_CASE("ifft2 undoes fft2 to 1e-10") {
  Rng rng(23);
  CTensor a = rand_ctensor(16, 16, rng);
  CTensor b = ifft2(fft2(a));
  for (std::int64_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(b.re[i] - a.re[i]) < 1e-10);
    CHECK(std::abs(b.im[i] - a.im[i]) < 1e-10);
  }
}

TEST_CASE("ifft2 carries the 1/N factor") {
  CTensor delta = CTensor::zeros({4, 4});
  delta.re[0] = 16.0;
  CTensor x = ifft2(delta);
  for (std::int64_t i = 0; i < x.size(); ++i) CHECK(x.re[i] == doctest::Approx(1.0));
}

TEST_CASE("fft adjoint identity") {
  // <F x, y> = <x, F^H y> with F^H the unnormalized inverse DFT.
  Rng rng(29);
  CTensor x = rand_ctensor(8, 8, rng);
  CTensor y = rand_ctensor(8, 8, rng);
  const double lhs = cdot_re(fft2(x), y);
  CTensor fhy = ifft2(y);
  Tensor n = Tensor::scalar(64.0);
  const double rhs = cdot_re(x, cscale(fhy, n));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("fft2 and ifft2 gradients match finite differences") {
  Rng rng(31);
  CTensor x = rand_ctensor(6, 6, rng, true);
  CTensor w = rand_ctensor(6, 6, rng);
  auto f = [&]() { return cinner_re(w, fft2(x)) + cinner_re(w, ifft2(x)); };
  auto report = grad_check(f, {{"re", x.re}, {"im", x.im}}, 1e-6, 1e-7);
  CHECK(report.pass);
}

TEST_CASE("cabs and its subgradient at the origin") {
  CTensor z(Tensor({3}, {3.0, 0.0, -1.0}, true), Tensor({3}, {4.0, 0.0, 0.0}, true));
  Tape tape;
  {
    Tape::Scope scope(tape);
    Tensor loss = sum(cabs(z));
    CHECK(loss.item() == doctest::Approx(6.0));
    tape.backward(loss);
  }
  CHECK(z.re.grad()[0] == doctest::Approx(0.6));
  CHECK(z.im.grad()[0] == doctest::Approx(0.8));
  CHECK(z.re.grad()[1] == 0.0);
  CHECK(z.im.grad()[1] == 0.0);
  CHECK(z.re.grad()[2] == doctest::Approx(-1.0));
}

TEST_CASE("complex algebra identities") {
  Rng rng(37);
  CTensor a = rand_ctensor(4, 4, rng);
  CTensor b = rand_ctensor(4, 4, rng);
  CTensor ab = cmul(a, b);
  for (std::int64_t i = 0; i < a.size(); ++i) {
    const std::complex<double> p =
        std::complex<double>(a.re[i], a.im[i]) * std::complex<double>(b.re[i], b.im[i]);
    CHECK(ab.re[i] == doctest::Approx(p.real()));
    CHECK(ab.im[i] == doctest::Approx(p.imag()));
  }
  CHECK(csumsq(a).item() == doctest::Approx(cdot_re(a, a)));
  // conj flips the inner-product phase
  CHECK(cinner_im(a, b).item() == doctest::Approx(-cinner_im(b, a).item()));
}

TEST_CASE("cnormalize is unit magnitude away from zero and safe at zero") {
  CTensor z(Tensor({2}, {3.0, 0.0}), Tensor({2}, {-4.0, 0.0}));
  CTensor u = cnormalize(z, 1e-8);
  CHECK(std::hypot(u.re[0], u.im[0]) == doctest::Approx(1.0));
  CHECK(u.re[1] == 0.0);
  CHECK(u.im[1] == 0.0);
}
