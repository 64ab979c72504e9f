#include <doctest.h>

#include <cmath>
#include <complex>

#include "lab/hankel.hpp"
#include "lab/rng.hpp"

using namespace lab::hankel;

namespace {

AnalyticSymbol random_symbol(lab::Rng& rng, int N, bool zero_axis) {
  AnalyticSymbol phi(N, zero_axis);
  for (int k1 = zero_axis ? 1 : 0; k1 < phi.extent(); ++k1)
    for (int k2 = zero_axis ? 1 : 0; k2 < phi.extent(); ++k2)
      phi.set(k1, k2, {rng.normal(), rng.normal()});
  return phi;
}

AnalyticSymbol geometric_symbol(int N, double r) {
  AnalyticSymbol phi(N, false);
  for (int k1 = 0; k1 < phi.extent(); ++k1)
    for (int k2 = 0; k2 < phi.extent(); ++k2)
      phi.set(k1, k2, {std::pow(r, k1 + k2), 0.0});
  return phi;
}

}  // namespace

TEST_CASE("hankel_matrix: structure") {
  AnalyticSymbol delta(3, false);
  delta.set(0, 0, {1, 0});
  const HankelMatrix H = hankel_matrix(delta);
  for (long r = 0; r < H.matrix().rows(); ++r)
    for (long c = 0; c < H.matrix().cols(); ++c)
      CHECK(H.matrix()(r, c) == (r == 0 && c == 0 ? Complex{1, 0} : Complex{0, 0}));

  lab::Rng rng(5);
  const AnalyticSymbol phi = random_symbol(rng, 5, false);
  const HankelMatrix A = hankel_matrix(phi);
  const int N = phi.N;
  for (int trial = 0; trial < 500; ++trial) {
    const int x1 = rng.below(N), x2 = rng.below(N);
    const int l1 = rng.below(N), l2 = rng.below(N);
    const int y1 = rng.below(std::min(x1 + l1, N - 1) + 1);
    const int y2 = rng.below(std::min(x2 + l2, N - 1) + 1);
    const int m1 = x1 + l1 - y1, m2 = x2 + l2 - y2;
    if (m1 >= N || m2 >= N) continue;
    CHECK(A.matrix()(x1 * N + x2, l1 * N + l2) == A.matrix()(y1 * N + y2, m1 * N + m2));
  }
}

TEST_CASE("schatten_norm: single entry, rank one, identities") {
  AnalyticSymbol delta(4, false);
  delta.set(0, 0, {1, 0});
  const HankelMatrix H = hankel_matrix(delta);
  for (double p : {1.0, 2.0, 3.5}) CHECK(schatten_norm(H, p) == doctest::Approx(1.0));

  const int N = 8;
  const double r = 0.6;
  const HankelMatrix G = hankel_matrix(geometric_symbol(N, r));
  const double geo = (1.0 - std::pow(r, 2.0 * N)) / (1.0 - r * r);
  for (double p : {1.0, 2.0, 4.0})
    CHECK(schatten_norm(G, p) == doctest::Approx(geo * geo).epsilon(1e-10));

  CHECK_THROWS(schatten_norm(H, 0.5));
  CHECK_THROWS(schatten_norm(H, std::numeric_limits<double>::infinity()));
}

TEST_CASE("schatten_norm: frobenius identity, monotonicity, phase invariance") {
  lab::Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const AnalyticSymbol phi = random_symbol(rng, 6, trial % 2 == 0);
    const HankelMatrix H = hankel_matrix(phi);
    const double s2 = schatten_norm(H, 2.0);
    CHECK(s2 == doctest::Approx(frobenius_norm(phi)).epsilon(1e-10));

    double prev = schatten_norm(H, 1.0);
    for (double p : {1.5, 2.0, 3.0, 6.0}) {
      const double cur = schatten_norm(H, p);
      CHECK(cur <= prev * (1 + 1e-12));
      prev = cur;
    }

    AnalyticSymbol rotated = phi;
    const Complex phase = std::polar(1.0, 0.7321);
    for (auto& c : rotated.coeffs) c *= phase;
    const HankelMatrix R = hankel_matrix(rotated);
    const auto& sv = H.singular_values();
    const auto& sw = R.singular_values();
    REQUIRE(sv.size() == sw.size());
    for (std::size_t k = 0; k < sv.size(); ++k)
      CHECK(sw[k] == doctest::Approx(sv[k]).epsilon(1e-10));
  }
}

TEST_CASE("operator_apply: examples and the two routes") {
  AnalyticSymbol delta(3, false);
  delta.set(0, 0, {1, 0});
  const HankelMatrix H = hankel_matrix(delta);
  std::vector<Complex> f(9, Complex{0, 0});
  f[0] = {1, 0};
  const auto g = operator_apply(H, f);
  CHECK(g[0] == Complex{1, 0});
  for (std::size_t n = 1; n < g.size(); ++n) CHECK(g[n] == Complex{0, 0});

  const auto zero = operator_apply(H, std::vector<Complex>(9, Complex{0, 0}));
  for (const auto& z : zero) CHECK(z == Complex{0, 0});

  lab::Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const int N = 4 + rng.below(8);
    const AnalyticSymbol phi = random_symbol(rng, N, false);
    std::vector<Complex> fhat(static_cast<std::size_t>(N) * N);
    for (auto& z : fhat) z = {rng.normal(), rng.normal()};
    const auto direct = operator_apply(hankel_matrix(phi), fhat);
    const auto fast = operator_apply_fft(phi, fhat);
    double scale = 0;
    for (const auto& z : direct) scale = std::max(scale, std::abs(z));
    for (std::size_t n = 0; n < direct.size(); ++n)
      CHECK(std::abs(direct[n] - fast[n]) <= 1e-10 * scale);
  }

  CHECK_THROWS(operator_apply(H, std::vector<Complex>(4)));
  CHECK_THROWS(operator_apply_fft(delta, std::vector<Complex>(4)));
}

TEST_CASE("besov_lattice_norm: tones, homogeneity, errors") {
  const int L = 0, Kp = 6;
  AnalyticSymbol zero(8, true);
  CHECK(besov_lattice_norm(zero, 2.0, L, Kp) == 0.0);

  // single tone at kappa = (2^a, 2^b)
  AnalyticSymbol tone(8, true);
  tone.set(2, 4, {1, 0});
  for (double p : {2.0, 4.0})
    CHECK(besov_lattice_norm(tone, p, L, Kp) ==
          doctest::Approx(std::pow(2.0, 3.0 / p) * std::pow(4.0, L / p)).epsilon(1e-10));

  AnalyticSymbol scaled = tone;
  for (auto& c : scaled.coeffs) c *= 3.0;
  CHECK(besov_lattice_norm(scaled, 2.0, L, Kp) ==
        doctest::Approx(3.0 * besov_lattice_norm(tone, 2.0, L, Kp)).epsilon(1e-12));

  AnalyticSymbol with_axis(8, false);
  with_axis.set(1, 1, {1, 0});
  CHECK_THROWS(besov_lattice_norm(with_axis, 2.0, L, Kp));
  CHECK_THROWS(besov_lattice_norm(tone, 2.0, 0, 4));  // 14 > M/2 - 1 = 7
}

TEST_CASE("equivalence_ratio: finite positive, zero symbol rejected") {
  lab::Rng rng(23);
  for (int trial = 0; trial < 4; ++trial) {
    const AnalyticSymbol phi = random_symbol(rng, 8, true);
    for (double p : {2.0, 4.0}) {
      const double ratio = equivalence_ratio(phi, p, 0, 6);
      CHECK(ratio > 0.0);
      CHECK(std::isfinite(ratio));
    }
  }
  const AnalyticSymbol zero(8, true);
  CHECK_THROWS_WITH(equivalence_ratio(zero, 2.0, 0, 6), "ratio undefined");
}
