#pragma once

// Brute-force twins of the geometry operations, written as plain cell scans
// with no shared machinery, used as independent oracles in the tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "lab/dyadic.hpp"

namespace oracles {

using lab::dyadic::DyadicInterval;
using lab::dyadic::DyadicRectangle;
using lab::dyadic::GridOpenSet;

struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

inline std::vector<DyadicInterval> all_intervals(int L, int K) {
  std::vector<DyadicInterval> out;
  for (int n = -K; n <= L; ++n)
    for (std::int64_t m = 0; m < (std::int64_t{1} << (L - n)); ++m)
      out.push_back({m, n});
  return out;
}

inline bool contains_rect(const GridOpenSet& s, const DyadicRectangle& r) {
  if (r.first.n < -s.K() || r.second.n < -s.K()) return false;
  if (r.first.left() < 0 || r.first.right() > s.window()) return false;
  if (r.second.left() < 0 || r.second.right() > s.window()) return false;
  const double h = s.cell_size();
  const int c0 = static_cast<int>(std::lround(r.first.left() / h));
  const int c1 = static_cast<int>(std::lround(r.first.right() / h));
  const int r0 = static_cast<int>(std::lround(r.second.left() / h));
  const int r1 = static_cast<int>(std::lround(r.second.right() / h));
  for (int row = r0; row < r1; ++row)
    for (int col = c0; col < c1; ++col)
      if (!s.cell(row, col)) return false;
  return true;
}

inline std::vector<DyadicRectangle> maximal_rects(const GridOpenSet& s, int direction) {
  std::vector<DyadicRectangle> out;
  const auto ivs = all_intervals(s.L(), s.K());
  for (const auto& I : ivs)
    for (const auto& J : ivs) {
      const DyadicRectangle r{I, J};
      if (!contains_rect(s, r)) continue;
      const DyadicInterval& grow = direction == 1 ? I : J;
      bool maximal = true;
      if (grow.n < s.L()) {
        const DyadicInterval p = grow.parent();
        const DyadicRectangle bigger =
            direction == 1 ? DyadicRectangle{p, J} : DyadicRectangle{I, p};
        maximal = !contains_rect(s, bigger);
      }
      if (maximal) out.push_back(r);
    }
  return out;
}

inline GridOpenSet enlarge(const GridOpenSet& s) {
  const int S = s.side();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(S) * S, 0);
  const auto ivs = all_intervals(s.L(), s.K());
  const double h = s.cell_size();
  for (int row = 0; row < S; ++row)
    for (int col = 0; col < S; ++col) {
      const double x1 = (col + 0.5) * h, x2 = (row + 0.5) * h;
      for (const auto& I : ivs) {
        if (!I.contains(x1)) continue;
        for (const auto& J : ivs) {
          if (!J.contains(x2)) continue;
          std::int64_t hits = 0, cells = 0;
          const int c0 = static_cast<int>(std::lround(I.left() / h));
          const int c1 = static_cast<int>(std::lround(I.right() / h));
          const int r0 = static_cast<int>(std::lround(J.left() / h));
          const int r1 = static_cast<int>(std::lround(J.right() / h));
          for (int rr = r0; rr < r1; ++rr)
            for (int cc = c0; cc < c1; ++cc) {
              ++cells;
              hits += s.cell(rr, cc) ? 1 : 0;
            }
          if (2 * hits > cells) {
            mask[static_cast<std::size_t>(row) * S + col] = 1;
            goto covered;
          }
        }
      }
    covered:;
    }
  return GridOpenSet(s.L(), s.K(), std::move(mask));
}

inline double gamma_of(const DyadicRectangle& r, const GridOpenSet& tilde,
                       int direction) {
  DyadicInterval hat = direction == 2 ? r.first : r.second;
  while (hat.n < tilde.L()) {
    const DyadicInterval p = hat.parent();
    const DyadicRectangle candidate = direction == 2
                                          ? DyadicRectangle{p, r.second}
                                          : DyadicRectangle{r.first, p};
    if (!contains_rect(tilde, candidate)) break;
    hat = p;
  }
  return hat.length() / (direction == 2 ? r.first.length() : r.second.length());
}

inline double journe_sum(const GridOpenSet& s, double delta, int direction) {
  const GridOpenSet tilde = oracles::enlarge(s);
  double sum = 0;
  for (const auto& r : oracles::maximal_rects(s, direction))
    sum += std::pow(gamma_of(r, tilde, direction), -delta) * r.area();
  return sum;
}

inline double geometric_sum(const GridOpenSet& s, double x1, double x2, int u,
                            int v, double beta) {
  const GridOpenSet tilde = oracles::enlarge(s);
  double sum = 0;
  for (const auto& r : oracles::maximal_rects(s, 2)) {
    const double w1 = std::ldexp(r.first.length(), u);
    const double w2 = std::ldexp(r.second.length(), v);
    const bool in1 = x1 >= r.first.center() - w1 / 2 && x1 < r.first.center() + w1 / 2;
    const bool in2 = x2 >= r.second.center() - w2 / 2 && x2 < r.second.center() + w2 / 2;
    if (in1 && in2) sum += std::pow(gamma_of(r, tilde, 2), beta) * r.area();
  }
  return sum;
}

inline double counting_sum(const std::vector<double>& g, int L, int K, double x,
                           double lambda) {
  double sum = 0;
  const double h = std::ldexp(1.0, -K);
  for (const auto& J : all_intervals(L, K)) {
    const int c0 = static_cast<int>(std::lround(J.left() / h));
    const int c1 = static_cast<int>(std::lround(J.right() / h));
    double inf = g[c0];
    for (int c = c0; c < c1; ++c) inf = std::min(inf, g[c]);
    if (inf <= 0) continue;
    const double w = lambda * J.length();
    if (x >= J.center() - w / 2 && x < J.center() + w / 2) sum += J.length() * inf;
  }
  return sum;
}

inline double f_j_measure(const GridOpenSet& s, const DyadicInterval& J) {
  const GridOpenSet tilde = oracles::enlarge(s);
  const int S = s.side();
  std::vector<std::uint8_t> covered(S, 0);
  const double h = s.cell_size();
  for (const auto& Ihat : all_intervals(s.L(), s.K()))
    if (contains_rect(tilde, {Ihat, J})) {
      const int c0 = static_cast<int>(std::lround(Ihat.left() / h));
      const int c1 = static_cast<int>(std::lround(Ihat.right() / h));
      for (int c = c0; c < c1; ++c) covered[c] = 1;
    }
  double m = 0;
  for (auto b : covered) m += b ? h : 0.0;
  return m;
}

inline GridOpenSet random_set(Rng& rng, int L, int K, int max_rects) {
  const int S = 1 << (L + K);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(S) * S, 0);
  const int count = rng.below(max_rects + 1);
  for (int i = 0; i < count; ++i) {
    const int n1 = -K + rng.below(L + K + 1);
    const int n2 = -K + rng.below(L + K + 1);
    const int w1 = 1 << (n1 + K), w2 = 1 << (n2 + K);
    const int m1 = rng.below(S / w1), m2 = rng.below(S / w2);
    for (int r = m2 * w2; r < (m2 + 1) * w2; ++r)
      for (int c = m1 * w1; c < (m1 + 1) * w1; ++c)
        mask[static_cast<std::size_t>(r) * S + c] = 1;
  }
  return GridOpenSet(L, K, std::move(mask));
}

}  // namespace oracles
