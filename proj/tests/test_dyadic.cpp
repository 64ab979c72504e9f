#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "lab/dyadic.hpp"
#include "oracles.hpp"

using namespace lab::dyadic;

namespace {

using Key = std::tuple<std::int64_t, int, std::int64_t, int>;

Key key(const DyadicRectangle& r) {
  return {r.first.m, r.first.n, r.second.m, r.second.n};
}

std::set<Key> keyset(const std::vector<DyadicRectangle>& rs) {
  std::set<Key> out;
  for (const auto& r : rs) out.insert(key(r));
  return out;
}

GridOpenSet unit_square(int L, int K) {
  return GridOpenSet::union_of(L, K, {{DyadicInterval{0, 0}, DyadicInterval{0, 0}}});
}

GridOpenSet l_shape(int L, int K) {
  // [0,1)^2 union [0,2) x [0,1/2)
  return GridOpenSet::union_of(
      L, K,
      {{DyadicInterval{0, 0}, DyadicInterval{0, 0}},
       {DyadicInterval{0, 1}, DyadicInterval{0, -1}}});
}

}  // namespace

TEST_CASE("dyadic intervals: nesting dichotomy") {
  oracles::Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n1 = rng.below(7) - 3, n2 = rng.below(7) - 3;
    const DyadicInterval a{rng.below(64), n1}, b{rng.below(64), n2};
    const double lo = std::max(a.left(), b.left());
    const double hi = std::min(a.right(), b.right());
    const bool disjoint = lo >= hi;
    const bool a_in_b = b.contains(a);
    const bool b_in_a = a.contains(b);
    CHECK((disjoint || a_in_b || b_in_a));
    if (a_in_b) {
      CHECK(a.left() >= b.left());
      CHECK(a.right() <= b.right());
    }
  }
}

TEST_CASE("grid open set: measure and cells") {
  const GridOpenSet empty(1, 2);
  CHECK(empty.measure() == 0);
  CHECK(empty.empty());

  const GridOpenSet sq = unit_square(1, 2);
  CHECK(sq.measure() == doctest::Approx(1.0));
  CHECK(sq.cell_count() == 16);
  CHECK(sq.refined().measure() == doctest::Approx(1.0));
  CHECK(sq.refined().K() == 3);

  const auto cells = sq.cells();
  const GridOpenSet back = GridOpenSet::from_cells(1, 2, cells);
  CHECK(back.mask() == sq.mask());
  CHECK(back.mask_hash() == sq.mask_hash());
}

TEST_CASE("maximal_rects: empty set") {
  CHECK(maximal_rects(GridOpenSet(1, 3), 1).empty());
  CHECK(maximal_rects(GridOpenSet(1, 3), 2).empty());
}

TEST_CASE("maximal_rects: unit square, direction 2, K = 2") {
  const GridOpenSet sq = unit_square(1, 2);
  const auto m2 = maximal_rects(sq, 2);
  CHECK(m2.size() == 7);
  std::set<Key> expected;
  for (int n = -2; n <= 0; ++n)
    for (std::int64_t m = 0; m < (1 << -n); ++m)
      expected.insert({m, n, 0, 0});
  CHECK(keyset(m2) == expected);
  // direction 1 is the transpose
  const auto m1 = maximal_rects(sq, 1);
  CHECK(m1.size() == 7);
  for (const auto& r : m1) CHECK(r.first == DyadicInterval{0, 0});
}

TEST_CASE("maximal_rects: L-shape matches brute force") {
  const GridOpenSet omega = l_shape(1, 2);
  for (int dir : {1, 2})
    CHECK(keyset(maximal_rects(omega, dir)) ==
          keyset(oracles::maximal_rects(omega, dir)));
}

TEST_CASE("maximal_rects: random sets match brute force, maximality holds") {
  oracles::Rng rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    const GridOpenSet omega = oracles::random_set(rng, 2, 2, 6);
    for (int dir : {1, 2}) {
      const auto fast = maximal_rects(omega, dir);
      CHECK(keyset(fast) == keyset(oracles::maximal_rects(omega, dir)));
      for (const auto& r : fast) {
        CHECK(omega.contains_rect(r));
        const DyadicInterval& grow = dir == 1 ? r.first : r.second;
        if (grow.n < omega.L()) {
          const DyadicRectangle bigger =
              dir == 1 ? DyadicRectangle{grow.parent(), r.second}
                       : DyadicRectangle{r.first, grow.parent()};
          CHECK(!omega.contains_rect(bigger));
        }
      }
    }
  }
}

TEST_CASE("enlarge: fixed points and brute force") {
  CHECK(enlarge(GridOpenSet(1, 2)).empty());

  const GridOpenSet sq = unit_square(1, 2);
  CHECK(enlarge(sq).mask() == sq.mask());

  // [0,2) x [0,1) is its own enlargement
  const GridOpenSet wide = GridOpenSet::union_of(
      1, 2, {{DyadicInterval{0, 1}, DyadicInterval{0, 0}}});
  CHECK(enlarge(wide).mask() == wide.mask());

  oracles::Rng rng(7);
  for (int trial = 0; trial < 8; ++trial) {
    const GridOpenSet omega = oracles::random_set(rng, 2, 2, 5);
    CHECK(enlarge(omega).mask() == oracles::enlarge(omega).mask());
  }
}

TEST_CASE("enlarge: contains the set, dyadic inside aligned variant") {
  oracles::Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const GridOpenSet omega = oracles::random_set(rng, 2, 2, 6);
    const GridOpenSet dy = enlarge(omega);
    const GridOpenSet al = enlarge(omega, MaximalVariant::aligned_rects);
    for (int r = 0; r < omega.side(); ++r)
      for (int c = 0; c < omega.side(); ++c) {
        if (omega.cell(r, c)) CHECK(dy.cell(r, c));
        if (dy.cell(r, c)) CHECK(al.cell(r, c));
      }
  }
}

TEST_CASE("enlarge: measure ratio bounded by 3 for the dyadic variant") {
  // Side-doubling intuition would suggest a factor 2, but a solid square with
  // two hair-thin crossing spikes tips BOTH axis-doubled rectangles past
  // density 1/2, and their union is (2+2-1)x the square in the thin-spike
  // limit. Search (randomized + adversarial hill climbing up to S = 256)
  // approaches 3 from below and never exceeds it; 3.0 is the asserted cap.
  oracles::Rng rng(5150);
  double worst = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const GridOpenSet omega = oracles::random_set(rng, 3, 3, 12);
    if (omega.empty()) continue;
    const double ratio = enlarge(omega).measure() / omega.measure();
    worst = std::max(worst, ratio);
    CHECK(ratio <= 3.0);
  }
  CHECK(worst >= 1.0);

  // cross family: two long unit bars, ratio tends to 2
  const GridOpenSet cross = GridOpenSet::union_of(
      3, 2,
      {{DyadicInterval{0, 3}, DyadicInterval{0, 0}},
       {DyadicInterval{0, 0}, DyadicInterval{0, 3}}});
  const double cross_ratio = enlarge(cross).measure() / cross.measure();
  CHECK(cross_ratio > 1.5);
  CHECK(cross_ratio <= 2.0);

  // square + spikes family: beats 2, approaches 3
  const int L = 3, K = 3, S = 1 << (L + K);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(S) * S, 0);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) mask[static_cast<std::size_t>(r) * S + c] = 1;
  for (int c = 0; c < S; ++c) mask[static_cast<std::size_t>(32) * S + c] = 1;
  for (int r = 0; r < S; ++r) mask[static_cast<std::size_t>(r) * S + 32] = 1;
  const GridOpenSet spiked(L, K, std::move(mask));
  const double spiked_ratio = enlarge(spiked).measure() / spiked.measure();
  CHECK(spiked_ratio > 2.0);
  CHECK(spiked_ratio <= 3.0);
  // the ratio is scale invariant under refinement
  CHECK(enlarge(spiked.refined()).measure() / spiked.refined().measure() ==
        doctest::Approx(spiked_ratio).epsilon(1e-12));

  // the cell-aligned variant dominates the dyadic one; its corpus constant is
  // measured here (small windows, the variant is quartic)
  oracles::Rng rng2(616);
  double worst_aligned = 0, worst_dyadic = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const GridOpenSet omega = oracles::random_set(rng2, 2, 2, 8);
    if (omega.empty()) continue;
    worst_dyadic = std::max(worst_dyadic, enlarge(omega).measure() / omega.measure());
    worst_aligned = std::max(
        worst_aligned,
        enlarge(omega, MaximalVariant::aligned_rects).measure() / omega.measure());
  }
  CHECK(worst_aligned >= worst_dyadic);
  CHECK(worst_aligned <= 4.0);
}

TEST_CASE("embed: hand cases") {
  const GridOpenSet sq = unit_square(1, 2);

  const EmbeddedRectangle whole =
      embed({DyadicInterval{0, 0}, DyadicInterval{0, 0}}, sq, 2);
  CHECK(whole.gamma == 1.0);
  CHECK(whole.hat == DyadicInterval{0, 0});

  const EmbeddedRectangle quarter =
      embed({DyadicInterval{0, -2}, DyadicInterval{0, 0}}, sq, 2);
  CHECK(quarter.gamma == 4.0);
  CHECK(quarter.hat == DyadicInterval{0, 0});

  // single dyadic rectangle omega = I0 x J0
  const GridOpenSet rect = GridOpenSet::union_of(
      1, 2, {{DyadicInterval{0, 0}, DyadicInterval{1, -1}}});
  const EmbeddedRectangle e =
      embed({DyadicInterval{1, -1}, DyadicInterval{1, -1}}, rect, 2);
  CHECK(e.hat == DyadicInterval{0, 0});
  CHECK(e.gamma == 2.0);

  CHECK_THROWS_WITH(embed({DyadicInterval{1, 0}, DyadicInterval{1, 0}}, sq, 2),
                    "not a member rectangle");
}

TEST_CASE("embed: gammas match brute force") {
  oracles::Rng rng(31337);
  for (int trial = 0; trial < 8; ++trial) {
    const GridOpenSet omega = oracles::random_set(rng, 2, 2, 5);
    const GridOpenSet tilde = oracles::enlarge(omega);
    for (int dir : {1, 2})
      for (const auto& e : embed_all(omega, dir)) {
        CHECK(e.gamma == oracles::gamma_of(e.rect, tilde, dir));
        CHECK(e.gamma >= 1.0);
        const DyadicInterval side = dir == 2 ? e.rect.first : e.rect.second;
        CHECK(e.hat.contains(side));
      }
  }
}

TEST_CASE("journe_sum: examples and oracle") {
  CHECK(journe_sum(GridOpenSet(1, 3), 1.0, 2) == 0.0);

  const GridOpenSet sq = unit_square(0, 4);
  CHECK(journe_sum(sq, 1.0, 2) == doctest::Approx(1.9375).epsilon(1e-14));
  CHECK(journe_sum(sq, 1.0, 1) == doctest::Approx(1.9375).epsilon(1e-14));

  CHECK_THROWS(journe_sum(sq, 0.0, 2));
  CHECK_THROWS(journe_sum(sq, -0.5, 2));

  oracles::Rng rng(404);
  for (int trial = 0; trial < 6; ++trial) {
    const GridOpenSet omega = oracles::random_set(rng, 2, 2, 5);
    for (double delta : {0.5, 1.0})
      CHECK(journe_sum(omega, delta, 2) ==
            doctest::Approx(oracles::journe_sum(omega, delta, 2)).epsilon(1e-12));
  }
}

TEST_CASE("geometric_sum: examples, errors, oracle") {
  CHECK(geometric_sum(GridOpenSet(1, 2), {0.5, 0.5}, 0, 0, 0.5) == 0.0);

  const GridOpenSet sq = unit_square(0, 4);
  const double expected = (1.0 - std::pow(2.0, -2.5)) / (1.0 - std::pow(2.0, -0.5));
  CHECK(geometric_sum(sq, {0.5, 0.5}, 0, 0, 0.5) ==
        doctest::Approx(expected).epsilon(1e-13));

  CHECK_THROWS_WITH(geometric_sum(sq, {0.5, 0.5}, 0, 0, 1.0),
                    "beta = delta(p-1) must be < 1 and positive");
  CHECK_THROWS(geometric_sum(sq, {0.5, 0.5}, 0, 0, 0.0));
  CHECK_THROWS(geometric_sum(sq, {0.5, 0.5}, -1, 0, 0.5));

  oracles::Rng rng(808);
  for (int trial = 0; trial < 6; ++trial) {
    const GridOpenSet omega = oracles::random_set(rng, 2, 2, 5);
    const double x1 = rng.uniform() * omega.window();
    const double x2 = rng.uniform() * omega.window();
    for (int u : {0, 4})
      CHECK(geometric_sum(omega, {x1, x2}, u, 0, 0.5) ==
            doctest::Approx(oracles::geometric_sum(omega, x1, x2, u, 0, 0.5))
                .epsilon(1e-12));
  }
}

TEST_CASE("slice_measure: examples") {
  const GridOpenSet sq = unit_square(1, 2);
  CHECK(slice_measure(sq, 0.5) == doctest::Approx(1.0));
  CHECK(slice_measure(sq, 1.5) == 0.0);
  CHECK(slice_measure(sq, -0.25) == 0.0);
  CHECK(slice_measure(sq, 7.0) == 0.0);

  const GridOpenSet shape = l_shape(1, 2);
  for (int row = 0; row < shape.side(); ++row) {
    const double y = (row + 0.5) * shape.cell_size();
    double manual = 0;
    for (int c = 0; c < shape.side(); ++c)
      manual += shape.cell(row, c) ? shape.cell_size() : 0.0;
    CHECK(slice_measure(shape, y) == doctest::Approx(manual));
  }
}

TEST_CASE("f_j_measure: examples, slice bound, oracle") {
  const GridOpenSet sq = unit_square(0, 3);
  CHECK(f_j_measure(sq, DyadicInterval{0, 0}) == doctest::Approx(1.0));
  CHECK(f_j_measure(GridOpenSet(1, 2), DyadicInterval{0, 0}) == 0.0);

  oracles::Rng rng(1213);
  for (int trial = 0; trial < 6; ++trial) {
    const GridOpenSet omega = oracles::random_set(rng, 2, 2, 5);
    const GridOpenSet tilde = enlarge(omega);
    for (int n = -1; n <= 1; ++n) {
      const DyadicInterval J{rng.below(1 << (omega.L() - n < 0 ? 0 : omega.L() - n)), n};
      const double fj = f_j_measure(omega, J, &tilde);
      CHECK(fj == doctest::Approx(oracles::f_j_measure(omega, J)).epsilon(1e-12));
      // |F_J| <= inf over rows of the slice function of the enlargement
      double inf_slice = omega.window();
      for (double y = J.left() + omega.cell_size() / 2; y < J.right();
           y += omega.cell_size())
        inf_slice = std::min(inf_slice, slice_measure(tilde, y));
      CHECK(fj <= inf_slice + 1e-12);
    }
  }
}

TEST_CASE("counting_sum: examples and hard bound") {
  StepFunction zero{0, 4, std::vector<double>(16, 0.0)};
  const auto z = counting_sum(zero, 0.3, 1.0);
  CHECK(z.sum == 0.0);
  CHECK(z.bound == 0.0);

  StepFunction one{0, 4, std::vector<double>(16, 1.0)};
  const auto r = counting_sum(one, 0.3, 1.0);
  CHECK(r.sum == doctest::Approx(1.9375).epsilon(1e-14));
  CHECK(r.bound == doctest::Approx(6.0));

  CHECK_THROWS(counting_sum(one, 0.3, 0.5));
  StepFunction neg{0, 4, std::vector<double>(16, 1.0)};
  neg.values[3] = -0.25;
  CHECK_THROWS(counting_sum(neg, 0.3, 1.0));

  oracles::Rng rng(606);
  for (int trial = 0; trial < 400; ++trial) {
    StepFunction g{2, 3, std::vector<double>(32, 0.0)};
    const int support = rng.below(33);
    for (int i = 0; i < support; ++i)
      g.values[rng.below(32)] = rng.uniform() * 3.0;
    const double x = rng.uniform() * 4.0;
    const double lambda = std::ldexp(1.0, rng.below(4));  // 1,2,4,8
    const auto res = counting_sum(g, x, lambda);
    CHECK(res.sum <= res.bound);
    CHECK(res.sum ==
          doctest::Approx(oracles::counting_sum(g.values, g.L, g.K, x, lambda))
              .epsilon(1e-12));
  }
}

TEST_CASE("annulus: examples, exclusions, tiling") {
  const DyadicInterval I{0, 0};
  const auto e0 = annulus(I, 0);
  REQUIRE(e0.size() == 1);
  CHECK(e0[0].lo == doctest::Approx(-3.5));
  CHECK(e0[0].hi == doctest::Approx(4.5));

  const auto e4 = annulus(I, 4);
  REQUIRE(e4.size() == 2);
  CHECK(e4[0].lo == doctest::Approx(-7.5));
  CHECK(e4[0].hi == doctest::Approx(-3.5));
  CHECK(e4[1].lo == doctest::Approx(4.5));
  CHECK(e4[1].hi == doctest::Approx(8.5));

  for (int u : {1, 2, 3, -1}) CHECK_THROWS_WITH(annulus(I, u), "excluded annulus index");

  // annuli for u = 0,4,5,... are pairwise disjoint and cover every point
  oracles::Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const double x = (rng.uniform() - 0.5) * 200.0;
    int covering = 0;
    for (int u : {0, 4, 5, 6, 7, 8, 9}) {
      for (const auto& piece : annulus(I, u))
        if (x >= piece.lo && x < piece.hi) ++covering;
    }
    if (std::abs(x - I.center()) < 0.5 * 256.0) CHECK(covering == 1);
  }
}

TEST_CASE("enlargement cache: write-once sharing") {
  EnlargementCache cache;
  const GridOpenSet omega = l_shape(1, 2);
  const auto a = cache.get(omega);
  const auto b = cache.get(omega);
  CHECK(a.get() == b.get());
  CHECK(a->mask() == enlarge(omega).mask());
  const auto c = cache.get(unit_square(1, 2));
  CHECK(c.get() != a.get());
}
