// SPDX-License-Identifier: Apache-2.0
#include "sparray/losses.hpp"
#include "sparray/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace sparray;

namespace {

CTensor rand_c(int n, Rng& rng) {
  std::vector<double> re(static_cast<std::size_t>(n) * n), im(re.size());
  for (auto& v : re) v = rng.normal();
  for (auto& v : im) v = rng.normal();
  return CTensor(Tensor({n, n}, re), Tensor({n, n}, im));
}

CTensor rotate_scale(const CTensor& a, double s, double phi) {
  const double cr = s * std::cos(phi), ci = s * std::sin(phi);
  return CTensor(a.re * cr - a.im * ci, a.re * ci + a.im * cr);
}

}  // namespace

TEST_CASE("si_mse is invariant to complex scaling of the estimate") {
  Rng rng(61);
  CTensor y = rand_c(8, rng);
  CTensor yhat = rand_c(8, rng);
  const double base = si_mse(yhat, y).item();
  for (auto [s, phi] : {std::pair{2.5, 0.0}, {0.3, 1.1}, {7.0, -2.0}, {1.0, M_PI / 2}}) {
    const double v = si_mse(rotate_scale(yhat, s, phi), y).item();
    CHECK(std::abs(v - base) < 1e-10);
  }
  // perfect estimate up to scale
  CHECK(si_mse(rotate_scale(y, 0.1, 2.0), y).item() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("si_mse degenerate inputs") {
  Rng rng(62);
  CTensor y = rand_c(4, rng);
  CTensor zero = CTensor::zeros({4, 4});
  CHECK(si_mse(zero, y).item() == 1.0);
  CHECK_THROWS_AS(si_mse(y, zero), ContractViolation);
}

TEST_CASE("conv and rec losses") {
  CTensor a(Tensor({2, 2}, {1, 0, 0, 0}), Tensor({2, 2}, {0, 0, 0, 0}));
  CTensor b(Tensor({2, 2}, {0, 0, 0, 0}), Tensor({2, 2}, {2, 0, 0, 0}));
  CHECK(conv_loss(a, b).item() == doctest::Approx(5.0));
  Tensor x({2, 2}, {1, 2, 3, 4});
  Tensor t({2, 2}, {1, 2, 3, 0});
  CHECK(rec_loss(x, t).item() == doctest::Approx(4.0));
}

TEST_CASE("regions are concentric disks with a guard band") {
  const double lambda0 = 0.44e-3, pitch = 27.5e-6;
  RegionMasks m = make_regions(64, pitch, lambda0);
  const int c = 32;
  for (auto idx : m.inner) {
    const int iz = static_cast<int>(idx) / 64, ix = static_cast<int>(idx) % 64;
    CHECK(pitch * std::hypot(ix - c, iz - c) <= 1.5 * lambda0 + 1e-12);
  }
  for (auto idx : m.outer) {
    const int iz = static_cast<int>(idx) / 64, ix = static_cast<int>(idx) % 64;
    CHECK(pitch * std::hypot(ix - c, iz - c) >= 2.5 * lambda0 - 1e-12);
  }
  // the center pixel is in the main lobe, the corner in the sidelobe region
  CHECK(std::count(m.inner.begin(), m.inner.end(), 32 * 64 + 32) == 1);
  CHECK(std::count(m.outer.begin(), m.outer.end(), 0) == 1);
  CHECK(m.inner.size() + m.outer.size() < 64 * 64);
  CHECK_THROWS_AS(make_regions(4, pitch, lambda0), ContractViolation);
}

TEST_CASE("delta kernel zeroes contrast and both SLR metrics") {
  CTensor delta = CTensor::zeros({64, 64});
  delta.re[32 * 64 + 32] = 1.0;
  RegionMasks m = make_regions(64, 27.5e-6, 0.44e-3);
  CHECK(contrast_loss(delta, m).item() == doctest::Approx(0.0));
  SlrResult slr = slr_losses(delta, m);
  CHECK(slr.q.item() == doctest::Approx(0.0));
  CHECK(slr.integral.item() == doctest::Approx(0.0));
  CHECK(slr.combined.item() == doctest::Approx(0.0));
}

TEST_CASE("slr quantile uses the requested order statistic") {
  // kernel with known side amplitudes: peak 2 in the center, plateau outside
  CTensor k = CTensor::zeros({64, 64});
  k.re[32 * 64 + 32] = 2.0;
  RegionMasks m = make_regions(64, 27.5e-6, 0.44e-3);
  for (auto idx : m.outer) k.re[idx] = 1.0;
  SlrResult slr = slr_losses(k, m);
  CHECK(slr.q.item() == doctest::Approx(0.5));
  CHECK(slr.integral.item() ==
        doctest::Approx(static_cast<double>(m.outer.size()) / 4.0));
}

TEST_CASE("total_loss applies the documented weights") {
  LossWeights w;
  CHECK(w.w_psf == 10.0);
  CHECK(w.w_conv == 1.0);
  CHECK(w.w_rec == 10.0);
  CHECK(w.lambda_contrast == 10.0);
  CHECK(w.lambda_slr == 10.0);
  CHECK(w.lambda_ent == 1.0);
  CHECK(w.lambda_row == 10.0);
  Tensor one = Tensor::scalar(1.0);
  CHECK(total_loss(one, one, one, one, one, one, one, w).item() == doctest::Approx(52.0));
}

TEST_CASE("loss report composite is the Table-1 quadruple mean") {
  LossReport r;
  r.psf = 0.1;
  r.contrast = 0.2;
  r.slr_q = 0.3;
  r.slr_i = 0.4;
  CHECK(r.composite() == doctest::Approx(0.25));
}

TEST_CASE("si_mse of an orthogonal estimate is one") {
  CTensor y = CTensor::zeros({2, 2});
  CTensor yhat = CTensor::zeros({2, 2});
  y.re[0] = 1.0;
  yhat.re[3] = 3.0;  // <yhat, y> = 0 -> alpha* = 0
  CHECK(si_mse(yhat, y).item() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rec_loss gradient is 2(ihat - iref)/n") {
  Tensor x({2, 2}, {1.0, 2.0, 3.0, 4.0}, true);
  Tensor t({2, 2}, {0.5, 2.0, 2.0, 6.0});
  Tape tape;
  {
    Tape::Scope scope(tape);
    Tensor loss = rec_loss(x, t);
    tape.backward(loss);
  }
  const auto& g = x.grad();
  for (std::int64_t i = 0; i < x.size(); ++i)
    CHECK(g[static_cast<std::size_t>(i)] == doctest::Approx(2.0 * (x[i] - t[i]) / 4.0));
}

TEST_CASE("uniform magnitude gives contrast one and slr from region sizes") {
  CTensor k(Tensor::full({64, 64}, 0.7), Tensor::zeros({64, 64}));
  RegionMasks m = make_regions(64, 27.5e-6, 0.44e-3);
  CHECK(contrast_loss(k, m).item() == doctest::Approx(1.0).epsilon(1e-9));
  SlrResult slr = slr_losses(k, m);
  CHECK(slr.q.item() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(slr.integral.item() ==
        doctest::Approx(static_cast<double>(m.outer.size()) / m.inner.size()).epsilon(1e-9));
}

TEST_CASE("moving sidelobe energy into the main lobe lowers the contrast") {
  RegionMasks m = make_regions(64, 27.5e-6, 0.44e-3);
  CTensor a = CTensor::zeros({64, 64});
  a.re[32 * 64 + 32] = 1.0;
  a.re[m.outer[0]] = 0.5;
  CTensor b = CTensor::zeros({64, 64});
  b.re[32 * 64 + 32] = 1.0;
  b.re[m.inner[0] == 32 * 64 + 32 ? m.inner[1] : m.inner[0]] = 0.5;
  CHECK(contrast_loss(b, m).item() < contrast_loss(a, m).item());
}

TEST_CASE("slr quantile reads a dominant sidelobe amplitude") {
  // top 10 percent of the side region at 0.3, main peak 1.0
  CTensor k = CTensor::zeros({64, 64});
  k.re[32 * 64 + 32] = 1.0;
  RegionMasks m = make_regions(64, 27.5e-6, 0.44e-3);
  const std::size_t hot = m.outer.size() / 10;
  for (std::size_t i = 0; i < hot; ++i) k.re[m.outer[i]] = 0.3;
  SlrResult slr = slr_losses(k, m);
  CHECK(slr.q.item() == doctest::Approx(0.3).epsilon(1e-9));
}
