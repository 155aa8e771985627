#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oboi/error.h"
#include "oboi/reduction.h"
#include "test_util.h"

using namespace oboi;
using oboi::testing::error_of;

namespace {

// Naive oracle: materialize the masked values of each channel and sum
// deviation powers with std::pow, in plain cell order.
std::vector<double> brute_force_aee(const FeatureMap& fm, const Mask& mask, int order) {
  std::vector<double> out(static_cast<std::size_t>(order) * fm.depth);
  for (std::size_t d = 0; d < fm.depth; ++d) {
    std::vector<double> xs;
    for (std::size_t h = 0; h < fm.height; ++h) {
      for (std::size_t w = 0; w < fm.width; ++w) {
        if (mask.at(h, w)) xs.push_back(fm.at(h, w, d));
      }
    }
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    out[d] = mean;
    for (int n = 2; n <= order; ++n) {
      double s = 0;
      for (double x : xs) s += std::pow(x - mean, n);
      out[static_cast<std::size_t>(n - 1) * fm.depth + d] = s / static_cast<double>(xs.size());
    }
  }
  return out;
}

FeatureMap random_map(std::mt19937_64& gen, std::size_t h, std::size_t w, std::size_t d) {
  std::normal_distribution<float> dist(0.0f, 1.5f);
  FeatureMap fm{h, w, d, std::vector<float>(h * w * d)};
  for (auto& v : fm.data) v = dist(gen);
  return fm;
}

Mask random_mask(std::mt19937_64& gen, std::size_t h, std::size_t w) {
  std::bernoulli_distribution coin(0.5);
  Mask m{h, w, std::vector<std::uint8_t>(h * w)};
  for (auto& c : m.cells) c = coin(gen) ? 1 : 0;
  if (m.count() == 0) m.cells[gen() % m.cells.size()] = 1;
  return m;
}

ReductionConfig aee(int order) {
  ReductionConfig c;
  c.mode = ReductionMode::kAee;
  c.order = order;
  return c;
}

std::vector<std::pair<std::size_t, std::size_t>> true_cells(const Mask& m) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (m.at(r, c)) cells.emplace_back(r, c);
    }
  }
  return cells;
}

}  // namespace

TEST_CASE("build_mask geometry") {
  SUBCASE("full-image box selects every cell") {
    for (std::size_t g : {1u, 3u, 7u}) {
      Mask m = build_mask({0, 0, 100, 60}, {60, 100}, g, g + 1);
      CHECK(m.count() == g * (g + 1));
    }
  }
  SUBCASE("64x64 image on a 4x4 grid, box (16,16,48,48)") {
    Mask m = build_mask({16, 16, 48, 48}, {64, 64}, 4, 4);
    using Cells = std::vector<std::pair<std::size_t, std::size_t>>;
    CHECK(true_cells(m) == Cells{{1, 1}, {1, 2}, {2, 1}, {2, 2}});
  }
  SUBCASE("degenerate box falls back to the cell containing its center") {
    Mask m = build_mask({30, 30, 31, 31}, {64, 64}, 4, 4);
    using Cells = std::vector<std::pair<std::size_t, std::size_t>>;
    CHECK(true_cells(m) == Cells{{1, 1}});
  }
  SUBCASE("fallback on the image border clamps to the grid") {
    Mask m = build_mask({63, 63, 64, 64}, {64, 64}, 4, 4);
    CHECK(m.count() == 1);
    CHECK(m.at(3, 3));
  }
  SUBCASE("unequal scale factors rescale x and y separately") {
    // 100 wide / 4 cols = 25 px, 40 high / 2 rows = 20 px; centers x 12.5, 37.5, 62.5, 87.5.
    Mask m = build_mask({30, 0, 70, 20}, {40, 100}, 2, 4);
    using Cells = std::vector<std::pair<std::size_t, std::size_t>>;
    CHECK(true_cells(m) == Cells{{0, 1}, {0, 2}});
  }
  SUBCASE("invalid boxes") {
    CHECK(error_of([] { build_mask({10, 10, 5, 20}, {64, 64}, 4, 4); }) == ErrorCode::kInvalidBox);
    CHECK(error_of([] { build_mask({0, 0, 65, 20}, {64, 64}, 4, 4); }) == ErrorCode::kInvalidBox);
  }
}

TEST_CASE("central_moments hand cases") {
  std::vector<double> c{2.5, 2.5, 2.5};
  auto m = central_moments(c, 4);
  CHECK(m == std::vector<double>{2.5, 0, 0, 0});

  std::vector<double> a{0, 2};
  auto ma = central_moments(a, 4);
  REQUIRE(ma.size() == 4);
  const double expect_a[] = {1, 1, 0, 1};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(ma[i] - expect_a[i]) <= 1e-12);

  std::vector<double> b{1, 2, 3, 6};
  auto mb = central_moments(b, 4);
  const double expect_b[] = {3, 3.5, 4.5, 24.5};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(mb[i] - expect_b[i]) <= 1e-12);

  std::vector<double> empty;
  CHECK(error_of([&] { central_moments(empty, 2); }) == ErrorCode::kEmptySupport);
  CHECK(error_of([&] { central_moments(b, 9); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("reduce examples") {
  SUBCASE("constant channels give [c, 0, 0]") {
    FeatureMap fm{3, 2, 2, {}};
    for (std::size_t k = 0; k < 6; ++k) {
      fm.data.push_back(1.5f);
      fm.data.push_back(-4.0f);
    }
    Mask m{3, 2, {0, 1, 1, 0, 0, 1}};
    CHECK(reduce(fm, m, aee(3)) == Embedding{1.5, -4.0, 0, 0, 0, 0});
  }
  FeatureMap two{2, 1, 1, {0.0f, 2.0f}};
  SUBCASE("two cells {0, 2}, full mask, R=2") {
    CHECK(reduce(two, Mask::full(2, 1), aee(2)) == Embedding{1, 1});
  }
  SUBCASE("mask selecting only the first cell") {
    CHECK(reduce(two, Mask{2, 1, {1, 0}}, aee(2)) == Embedding{0, 0});
  }
  SUBCASE("logits mode returns the logits") {
    ReductionConfig c;
    c.mode = ReductionMode::kLogits;
    std::vector<float> logits{0.25f, -1.0f, 3.0f};
    CHECK(reduce(two, Mask{}, c, std::span<const float>(logits)) == Embedding{0.25, -1.0, 3.0});
    CHECK(error_of([&] { reduce(two, Mask{}, c); }) == ErrorCode::kMissingLogits);
  }
  SUBCASE("mask dims must match the grid") {
    CHECK(error_of([&] { reduce(two, Mask::full(1, 2), aee(2)); }) == ErrorCode::kShapeMismatch);
  }
}

TEST_CASE("reduce(aee) matches the brute-force oracle") {
  std::mt19937_64 gen(1234);
  std::uniform_int_distribution<std::size_t> side(1, 8), depth(1, 16);
  std::uniform_int_distribution<int> order(1, 6);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t h = side(gen), w = side(gen), d = depth(gen);
    FeatureMap fm = random_map(gen, h, w, d);
    Mask mask = random_mask(gen, h, w);
    const int r = order(gen);
    auto got = reduce(fm, mask, aee(r));
    auto want = brute_force_aee(fm, mask, r);
    REQUIRE(got.size() == want.size());
    double worst = 0;
    for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("permuting cells together with the mask leaves AEE unchanged") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 1 + gen() % 8, w = 1 + gen() % 8, d = 1 + gen() % 16;
    FeatureMap fm = random_map(gen, h, w, d);
    Mask mask = random_mask(gen, h, w);
    std::vector<std::size_t> perm(h * w);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    FeatureMap pf = fm;
    Mask pm = mask;
    for (std::size_t k = 0; k < perm.size(); ++k) {
      pm.cells[k] = mask.cells[perm[k]];
      for (std::size_t c = 0; c < d; ++c) pf.data[k * d + c] = fm.data[perm[k] * d + c];
    }
    CHECK(reduce(fm, mask, aee(5)) == reduce(pf, pm, aee(5)));
  }
}

TEST_CASE("scaling features by alpha scales block n by alpha^n") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t h = 1 + gen() % 8, w = 1 + gen() % 8, d = 1 + gen() % 16;
    // 1/64 grid: scaling by 0.5, 2 and 10 stays exact in float32.
    FeatureMap fm = random_map(gen, h, w, d);
    for (auto& v : fm.data) v = std::round(v * 64.0f) / 64.0f;
    Mask mask = random_mask(gen, h, w);
    auto base = reduce(fm, mask, aee(4));
    for (double alpha : {0.5, 2.0, 10.0}) {
      FeatureMap scaled = fm;
      for (auto& v : scaled.data) v = static_cast<float>(v * alpha);
      auto got = reduce(scaled, mask, aee(4));
      for (std::size_t n = 0; n < 4; ++n) {
        for (std::size_t c = 0; c < d; ++c) {
          const double want = base[n * d + c] * std::pow(alpha, static_cast<double>(n + 1));
          const double err = std::abs(got[n * d + c] - want);
          CHECK(err <= 1e-9 * std::max(1.0, std::abs(want)));
        }
      }
    }
  }
}

TEST_CASE("ee equals aee with R=1, and no-mask equals the full mask") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t h = 1 + gen() % 8, w = 1 + gen() % 8, d = 1 + gen() % 16;
    FeatureMap fm = random_map(gen, h, w, d);
    Mask mask = random_mask(gen, h, w);
    ReductionConfig ee;
    ee.mode = ReductionMode::kEe;
    CHECK(reduce(fm, mask, ee) == reduce(fm, mask, aee(1)));

    ReductionConfig unmasked = aee(3);
    unmasked.use_mask = false;
    CHECK(reduce(fm, mask, unmasked) == reduce(fm, Mask::full(h, w), aee(3)));
  }
}

TEST_CASE("standardizer_fit") {
  std::vector<Embedding> one{{3, -1, 2}};
  auto s1 = standardizer_fit(one);
  CHECK(s1.shift == Embedding{3, -1, 2});
  CHECK(s1.scale == Embedding{1, 1, 1});

  std::vector<Embedding> two{{0, 0}, {2, 4}};
  auto s2 = standardizer_fit(two);
  CHECK(s2.shift == Embedding{1, 2});
  CHECK(s2.scale == Embedding{1, 2});
  CHECK(s2.apply(Embedding{2, 4}) == Embedding{1, 1});

  std::vector<Embedding> constant{{5, 1}, {5, 3}};
  CHECK(standardizer_fit(constant).scale[0] == 1.0);

  std::vector<Embedding> none;
  CHECK(error_of([&] { standardizer_fit(none); }) == ErrorCode::kEmptySupport);
  std::vector<Embedding> ragged{{1, 2}, {1}};
  CHECK(error_of([&] { standardizer_fit(ragged); }) == ErrorCode::kShapeMismatch);
}
