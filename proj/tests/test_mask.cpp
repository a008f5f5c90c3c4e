// SPDX-License-Identifier: Apache-2.0
#include "sparray/gradcheck.hpp"
#include "sparray/mask.hpp"
#include "sparray/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace sparray;

namespace {

Tensor rand_logits(int ne, int k, std::uint64_t seed, double std_dev = 1.0) {
  Rng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(ne) * k);
  for (auto& x : v) x = std_dev * rng.normal();
  return Tensor({ne, k}, std::move(v), true);
}

}  // namespace

TEST_CASE("soft columns are stochastic with claimed rows zeroed") {
  Tensor logits = rand_logits(8, 3, 42);
  Tensor p = soft_columns(logits, 1.3);
  for (int j = 0; j < 3; ++j) {
    double s = 0;
    for (int i = 0; i < 8; ++i) s += p[i * 3 + j];
    CHECK(s == doctest::Approx(1.0));
  }
  Tensor hard = harden(p);
  const auto rows = hard_rows(hard);
  // each later column assigns zero probability to rows claimed earlier
  for (int j = 1; j < 3; ++j)
    for (int jj = 0; jj < j; ++jj) CHECK(p[rows[static_cast<std::size_t>(jj)] * 3 + j] == 0.0);
}

TEST_CASE("harden yields k distinct rows, ties to the lowest row") {
  Tensor p({3, 2}, {0.5, 0.25, 0.5, 0.5, 0.0, 0.25});
  Tensor h = harden(p);
  const auto rows = hard_rows(h);
  CHECK(rows[0] == 0);  // tie between rows 0 and 1 in column 0
  CHECK(rows[1] == 1);
  std::set<int> distinct(rows.begin(), rows.end());
  CHECK(distinct.size() == 2);
}

TEST_CASE("mask_forward keeps exactly k distinct elements across seeds") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SelectionMask m = init_mask(16, 8, seed);
    MaskForward mf = mask_forward(m, 2.0);
    std::set<int> distinct(mf.selected.begin(), mf.selected.end());
    CHECK(distinct.size() == 8);
    double total = 0;
    for (std::int64_t i = 0; i < mf.w.size(); ++i) {
      CHECK((mf.w[i] == 0.0 || mf.w[i] == 1.0));
      total += mf.w[i];
    }
    CHECK(total == doctest::Approx(8.0));
  }
}

TEST_CASE("ste forward is bit-identical to hard, pullback to soft") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor logits = rand_logits(12, 5, 1000 + static_cast<std::uint64_t>(trial));
    Tensor p_soft = soft_columns(logits, 1.7);
    Tensor p_hard = harden(p_soft);

    std::vector<double> w(static_cast<std::size_t>(logits.size()));
    for (auto& x : w) x = rng.normal();
    Tensor lin({12, 5}, w, false);

    // forward bitwise identity
    Tensor logits2(logits.shape(), logits.data(), true);
    Tape tape_ste;
    {
      Tape::Scope scope(tape_ste);
      Tensor ps = soft_columns(logits2, 1.7);
      Tensor pst = ste_combine(harden(ps), ps);
      for (std::int64_t i = 0; i < pst.size(); ++i) CHECK(pst[i] == p_hard[i]);
      Tensor loss = sum(pst * lin);
      tape_ste.backward(loss);
    }
    Tensor logits3(logits.shape(), logits.data(), true);
    Tape tape_soft;
    {
      Tape::Scope scope(tape_soft);
      Tensor loss = sum(soft_columns(logits3, 1.7) * lin);
      tape_soft.backward(loss);
    }
    const auto& g_ste = logits2.grad();
    const auto& g_soft = logits3.grad();
    for (std::size_t i = 0; i < g_ste.size(); ++i) CHECK(g_ste[i] == g_soft[i]);
  }
}

TEST_CASE("soft path gradient vs finite differences") {
  Tensor logits = rand_logits(6, 3, 99);
  Rng rng(5);
  std::vector<double> w(static_cast<std::size_t>(logits.size()));
  for (auto& x : w) x = rng.normal();
  Tensor lin({6, 3}, w, false);
  auto f = [&]() { return sum(soft_columns(logits, 1.5) * lin); };
  auto report = grad_check(f, {{"logits", logits}}, 1e-6, 1e-6);
  CHECK(report.pass);
}

TEST_CASE("element weights are row sums") {
  Tensor p({3, 2}, {1.0, 0.0, 0.0, 1.0, 0.0, 0.0});
  Tensor w = element_weights(p);
  CHECK(w.dim(0) == 3);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(1.0));
  CHECK(w[2] == doctest::Approx(0.0));
}

TEST_CASE("entropy and row diversity") {
  // uniform columns maximize entropy: -log(1/n + eps-ish) ~ log n
  Tensor uniform({4, 2}, std::vector<double>(8, 0.25));
  CHECK(mask_entropy(uniform).item() == doctest::Approx(-std::log(0.25 + 1e-12)).epsilon(1e-6));
  Tensor onehot({2, 2}, {1.0, 0.0, 0.0, 1.0});
  CHECK(mask_entropy(onehot).item() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(row_diversity(onehot).item() == doctest::Approx(0.0));
  Tensor doubled({2, 2}, {1.0, 1.0, 0.0, 0.0});
  CHECK(row_diversity(doubled).item() == doctest::Approx(1.0));
}

TEST_CASE("temperature schedule hits the pinned values") {
  CHECK(temperature(0) == doctest::Approx(6.0));
  CHECK(temperature(750) == doctest::Approx(3.6));
  CHECK(temperature(1500) == doctest::Approx(1.2));
  CHECK(temperature(5000) == doctest::Approx(1.2));
  // monotone non-increasing over the warmup
  double prev = temperature(0);
  for (int t = 1; t <= 1500; t += 25) {
    const double cur = temperature(t);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("init_mask is seeded and sized") {
  SelectionMask a = init_mask(32, 16, 9);
  SelectionMask b = init_mask(32, 16, 9);
  SelectionMask c = init_mask(32, 16, 10);
  CHECK(a.logits.shape() == std::vector<int>{32, 16});
  for (std::int64_t i = 0; i < a.logits.size(); ++i) CHECK(a.logits[i] == b.logits[i]);
  bool differs = false;
  for (std::int64_t i = 0; i < a.logits.size(); ++i)
    if (a.logits[i] != c.logits[i]) differs = true;
  CHECK(differs);
}

TEST_CASE("sequential exclusion falls to the next-best row") {
  // both columns favor row 0; column 1 must take the runner-up
  Tensor logits({4, 2}, {5.0, 5.0, 2.0, 1.0, 1.0, 2.0, 0.0, 0.0}, false);
  Tensor p = soft_columns(logits, 1.0);
  Tensor h = harden(p);
  const auto rows = hard_rows(h);
  CHECK(rows[0] == 0);
  CHECK(rows[1] == 2);
  CHECK(p[0 * 2 + 1] == 0.0);  // row 0 excluded from column 1
  // column 1 is the 3-row softmax over the remaining rows
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(0.0);
  CHECK(p[1 * 2 + 1] == doctest::Approx(std::exp(1.0) / z));
}

TEST_CASE("k equal to n_e exhausts all rows into a permutation matrix") {
  SelectionMask m = init_mask(8, 8, 21, 1.0);
  MaskForward mf = mask_forward(m, 1.5);
  std::set<int> rows(mf.selected.begin(), mf.selected.end());
  CHECK(rows.size() == 8);
  for (std::int64_t i = 0; i < mf.w.size(); ++i) CHECK(mf.w[i] == 1.0);
}

TEST_CASE("uniform soft columns give row sums k over n_e") {
  const int ne = 8, k = 4;
  Tensor p({ne, k}, std::vector<double>(static_cast<std::size_t>(ne) * k, 1.0 / ne));
  Tensor w = element_weights(p);
  for (std::int64_t i = 0; i < w.size(); ++i)
    CHECK(w[i] == doctest::Approx(static_cast<double>(k) / ne));
}

TEST_CASE("entropy of a half-half column is log 2") {
  Tensor p({2, 1}, {0.5, 0.5});
  CHECK(mask_entropy(p).item() == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("row diversity of s_e = 1.5 is 0.25") {
  Tensor p({1, 2}, {0.75, 0.75});
  CHECK(row_diversity(p).item() == doctest::Approx(0.25));
}
