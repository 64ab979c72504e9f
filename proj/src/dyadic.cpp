#include "lab/dyadic.hpp"

#include <algorithm>
#include <stdexcept>

namespace lab::dyadic {

bool DyadicInterval::contains(const DyadicInterval& other) const {
  if (n < other.n) return false;
  const int shift = n - other.n;
  if (shift >= 63) return m == (other.m < 0 ? -1 : 0);
  return (other.m >> shift) == m;
}

GridOpenSet::GridOpenSet(int L, int K) : GridOpenSet(L, K, std::vector<std::uint8_t>()) {}

GridOpenSet::GridOpenSet(int L, int K, std::vector<std::uint8_t> mask)
    : L_(L), K_(K), mask_(std::move(mask)) {
  if (L < 0 || K < 0 || L + K > 24)
    throw std::invalid_argument("GridOpenSet: bad window/base exponents");
  side_ = 1 << (L_ + K_);
  const std::size_t cells = static_cast<std::size_t>(side_) * side_;
  if (mask_.empty()) mask_.assign(cells, 0);
  if (mask_.size() != cells)
    throw std::invalid_argument("GridOpenSet: mask size mismatch");
  finalize();
}

GridOpenSet GridOpenSet::from_cells(int L, int K,
                                    const std::vector<std::pair<int, int>>& cells) {
  const int side = 1 << (L + K);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(side) * side, 0);
  for (const auto& [row, col] : cells) {
    if (row < 0 || row >= side || col < 0 || col >= side)
      throw std::invalid_argument("GridOpenSet: cell index out of window");
    mask[static_cast<std::size_t>(row) * side + col] = 1;
  }
  return GridOpenSet(L, K, std::move(mask));
}

GridOpenSet GridOpenSet::union_of(int L, int K,
                                  const std::vector<DyadicRectangle>& rects) {
  const int side = 1 << (L + K);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(side) * side, 0);
  GridOpenSet probe(L, K);  // for span arithmetic
  for (const auto& r : rects) {
    if (!probe.in_window(r))
      throw std::invalid_argument("GridOpenSet: rectangle outside window");
    auto [c0, c1] = probe.cell_span(r.first);
    auto [r0, r1] = probe.cell_span(r.second);
    for (int row = r0; row < r1; ++row)
      std::fill(mask.begin() + static_cast<std::size_t>(row) * side + c0,
                mask.begin() + static_cast<std::size_t>(row) * side + c1,
                std::uint8_t{1});
  }
  return GridOpenSet(L, K, std::move(mask));
}

void GridOpenSet::finalize() {
  const int S = side_;
  prefix_.assign(static_cast<std::size_t>(S + 1) * (S + 1), 0);
  count_ = 0;
  for (int r = 0; r < S; ++r) {
    std::int64_t rowsum = 0;
    for (int c = 0; c < S; ++c) {
      const bool on = mask_[static_cast<std::size_t>(r) * S + c] != 0;
      count_ += on;
      rowsum += on;
      prefix_[static_cast<std::size_t>(r + 1) * (S + 1) + (c + 1)] =
          prefix_[static_cast<std::size_t>(r) * (S + 1) + (c + 1)] + rowsum;
    }
  }
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<std::uint64_t>(L_));
  mix(static_cast<std::uint64_t>(K_));
  for (std::uint8_t b : mask_) mix(b);
  hash_ = h;
}

std::int64_t GridOpenSet::count(int r0, int r1, int c0, int c1) const {
  r0 = std::max(r0, 0);
  c0 = std::max(c0, 0);
  r1 = std::min(r1, side_);
  c1 = std::min(c1, side_);
  if (r0 >= r1 || c0 >= c1) return 0;
  const int W = side_ + 1;
  return prefix_[static_cast<std::size_t>(r1) * W + c1] -
         prefix_[static_cast<std::size_t>(r0) * W + c1] -
         prefix_[static_cast<std::size_t>(r1) * W + c0] +
         prefix_[static_cast<std::size_t>(r0) * W + c0];
}

std::pair<int, int> GridOpenSet::cell_span(const DyadicInterval& iv) const {
  const int shift = iv.n + K_;
  if (shift < 0) throw std::invalid_argument("cell_span: interval below base scale");
  return {static_cast<int>(iv.m << shift), static_cast<int>((iv.m + 1) << shift)};
}

bool GridOpenSet::in_window(const DyadicInterval& iv) const {
  if (iv.n < -K_ || iv.n > L_) return false;
  const std::int64_t positions = std::int64_t{1} << (L_ - iv.n);
  return iv.m >= 0 && iv.m < positions;
}

bool GridOpenSet::in_window(const DyadicRectangle& r) const {
  return in_window(r.first) && in_window(r.second);
}

bool GridOpenSet::contains_rect(const DyadicRectangle& r) const {
  if (!in_window(r)) return false;
  auto [c0, c1] = cell_span(r.first);
  auto [r0, r1] = cell_span(r.second);
  const std::int64_t area = static_cast<std::int64_t>(r1 - r0) * (c1 - c0);
  return count(r0, r1, c0, c1) == area;
}

GridOpenSet GridOpenSet::refined() const {
  const int S2 = side_ * 2;
  std::vector<std::uint8_t> fine(static_cast<std::size_t>(S2) * S2, 0);
  for (int r = 0; r < side_; ++r)
    for (int c = 0; c < side_; ++c)
      if (cell(r, c)) {
        fine[static_cast<std::size_t>(2 * r) * S2 + 2 * c] = 1;
        fine[static_cast<std::size_t>(2 * r) * S2 + 2 * c + 1] = 1;
        fine[static_cast<std::size_t>(2 * r + 1) * S2 + 2 * c] = 1;
        fine[static_cast<std::size_t>(2 * r + 1) * S2 + 2 * c + 1] = 1;
      }
  return GridOpenSet(L_, K_ + 1, std::move(fine));
}

std::vector<std::pair<int, int>> GridOpenSet::cells() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(count_));
  for (int r = 0; r < side_; ++r)
    for (int c = 0; c < side_; ++c)
      if (cell(r, c)) out.emplace_back(r, c);
  return out;
}

namespace {

GridOpenSet transpose(const GridOpenSet& s) {
  const int S = s.side();
  std::vector<std::uint8_t> t(static_cast<std::size_t>(S) * S, 0);
  for (int r = 0; r < S; ++r)
    for (int c = 0; c < S; ++c)
      t[static_cast<std::size_t>(c) * S + r] = s.cell(r, c) ? 1 : 0;
  return GridOpenSet(s.L(), s.K(), std::move(t));
}

// Rectangles I x J inside omega with the second side J maximal.
std::vector<DyadicRectangle> maximal_rects_second(const GridOpenSet& omega) {
  std::vector<DyadicRectangle> out;
  if (omega.empty()) return out;
  const int S = omega.side();
  const int L = omega.L(), K = omega.K();
  std::vector<std::int64_t> full_rows(S + 1);
  for (int nI = -K; nI <= L; ++nI) {
    const int wI = 1 << (nI + K);
    for (int mI = 0; mI < S / wI; ++mI) {
      const int c0 = mI * wI, c1 = c0 + wI;
      full_rows[0] = 0;
      for (int row = 0; row < S; ++row)
        full_rows[row + 1] =
            full_rows[row] + (omega.count(row, row + 1, c0, c1) == wI ? 1 : 0);
      auto all_full = [&](int r0, int r1) {
        return full_rows[r1] - full_rows[r0] == r1 - r0;
      };
      for (int nJ = L; nJ >= -K; --nJ) {
        const int wJ = 1 << (nJ + K);
        for (int mJ = 0; mJ < S / wJ; ++mJ) {
          const int r0 = mJ * wJ;
          if (!all_full(r0, r0 + wJ)) continue;
          if (nJ < L) {
            const int p0 = (mJ >> 1) * (2 * wJ);
            if (all_full(p0, p0 + 2 * wJ)) continue;  // parent full: not maximal
          }
          out.push_back({DyadicInterval{mI, nI}, DyadicInterval{mJ, nJ}});
        }
      }
    }
  }
  return out;
}

}  // namespace

std::vector<DyadicRectangle> maximal_rects(const GridOpenSet& omega, int direction) {
  if (direction != 1 && direction != 2)
    throw std::invalid_argument("direction must be 1 or 2");
  if (direction == 2) return maximal_rects_second(omega);
  auto swapped = maximal_rects_second(transpose(omega));
  for (auto& r : swapped) std::swap(r.first, r.second);
  return swapped;
}

GridOpenSet enlarge(const GridOpenSet& omega, MaximalVariant variant) {
  const int S = omega.side();
  const int L = omega.L(), K = omega.K();
  std::vector<std::int64_t> diff(static_cast<std::size_t>(S + 1) * (S + 1), 0);
  auto mark = [&](int r0, int r1, int c0, int c1) {
    diff[static_cast<std::size_t>(r0) * (S + 1) + c0] += 1;
    diff[static_cast<std::size_t>(r0) * (S + 1) + c1] -= 1;
    diff[static_cast<std::size_t>(r1) * (S + 1) + c0] -= 1;
    diff[static_cast<std::size_t>(r1) * (S + 1) + c1] += 1;
  };
  if (variant == MaximalVariant::dyadic) {
    for (int nJ = -K; nJ <= L; ++nJ) {
      const int wJ = 1 << (nJ + K);
      for (int nI = -K; nI <= L; ++nI) {
        const int wI = 1 << (nI + K);
        const std::int64_t area = static_cast<std::int64_t>(wI) * wJ;
        for (int r0 = 0; r0 < S; r0 += wJ)
          for (int c0 = 0; c0 < S; c0 += wI)
            if (2 * omega.count(r0, r0 + wJ, c0, c0 + wI) > area)
              mark(r0, r0 + wJ, c0, c0 + wI);
      }
    }
  } else {
    // every cell-aligned axis-parallel rectangle; quartic scan, cross-check only
    for (int r0 = 0; r0 < S; ++r0)
      for (int r1 = r0 + 1; r1 <= S; ++r1)
        for (int c0 = 0; c0 < S; ++c0)
          for (int c1 = c0 + 1; c1 <= S; ++c1) {
            const std::int64_t area = static_cast<std::int64_t>(r1 - r0) * (c1 - c0);
            if (2 * omega.count(r0, r1, c0, c1) > area) mark(r0, r1, c0, c1);
          }
  }
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(S) * S, 0);
  std::vector<std::int64_t> rowacc(static_cast<std::size_t>(S + 1) * (S + 1), 0);
  for (int r = 0; r <= S; ++r) {
    std::int64_t run = 0;
    for (int c = 0; c <= S; ++c) {
      run += diff[static_cast<std::size_t>(r) * (S + 1) + c];
      rowacc[static_cast<std::size_t>(r) * (S + 1) + c] =
          (r > 0 ? rowacc[static_cast<std::size_t>(r - 1) * (S + 1) + c] : 0) + run;
      if (r < S && c < S && rowacc[static_cast<std::size_t>(r) * (S + 1) + c] > 0)
        mask[static_cast<std::size_t>(r) * S + c] = 1;
    }
  }
  return GridOpenSet(L, K, std::move(mask));
}

EmbeddedRectangle embed(const DyadicRectangle& r, const GridOpenSet& omega,
                        int direction, const GridOpenSet* enlarged) {
  if (direction != 1 && direction != 2)
    throw std::invalid_argument("direction must be 1 or 2");
  if (!omega.contains_rect(r))
    throw std::invalid_argument("not a member rectangle");
  GridOpenSet local(0, 0);
  if (!enlarged) {
    local = enlarge(omega);
    enlarged = &local;
  }
  EmbeddedRectangle e{r, direction == 2 ? r.first : r.second, 1.0, direction};
  while (e.hat.n < omega.L()) {
    const DyadicInterval p = e.hat.parent();
    const DyadicRectangle candidate =
        direction == 2 ? DyadicRectangle{p, r.second} : DyadicRectangle{r.first, p};
    if (!enlarged->contains_rect(candidate)) break;
    e.hat = p;
  }
  const int base = direction == 2 ? r.first.n : r.second.n;
  e.gamma = std::ldexp(1.0, e.hat.n - base);
  return e;
}

std::vector<EmbeddedRectangle> embed_all(const GridOpenSet& omega, int direction,
                                         const GridOpenSet* enlarged) {
  GridOpenSet local(0, 0);
  if (!enlarged) {
    local = enlarge(omega);
    enlarged = &local;
  }
  std::vector<EmbeddedRectangle> out;
  for (const auto& r : maximal_rects(omega, direction))
    out.push_back(embed(r, omega, direction, enlarged));
  return out;
}

double journe_sum(const std::vector<EmbeddedRectangle>& family, double delta) {
  if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
  double sum = 0;
  for (const auto& e : family) sum += std::pow(e.gamma, -delta) * e.rect.area();
  return sum;
}

double journe_sum(const GridOpenSet& omega, double delta, int direction) {
  if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
  return journe_sum(embed_all(omega, direction), delta);
}

namespace {

bool in_dilate(const DyadicInterval& iv, int u, double x) {
  const double w = std::ldexp(iv.length(), u);
  const double lo = iv.center() - 0.5 * w;
  return x >= lo && x < lo + w;
}

}  // namespace

double geometric_sum(const std::vector<EmbeddedRectangle>& family, Point x, int u,
                     int v, double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("beta = delta(p-1) must be < 1 and positive");
  if (u < 0 || v < 0) throw std::invalid_argument("u and v must be nonnegative");
  double sum = 0;
  for (const auto& e : family)
    if (in_dilate(e.rect.first, u, x.x1) && in_dilate(e.rect.second, v, x.x2))
      sum += std::pow(e.gamma, beta) * e.rect.area();
  return sum;
}

double geometric_sum(const GridOpenSet& omega, Point x, int u, int v, double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("beta = delta(p-1) must be < 1 and positive");
  if (u < 0 || v < 0) throw std::invalid_argument("u and v must be nonnegative");
  return geometric_sum(embed_all(omega, 2), x, u, v, beta);
}

double slice_measure(const GridOpenSet& set, double y) {
  if (y < 0 || y >= set.window()) return 0;
  const int row = static_cast<int>(std::floor(y / set.cell_size()));
  return static_cast<double>(set.count(row, row + 1, 0, set.side())) *
         set.cell_size();
}

double f_j_measure(const GridOpenSet& omega, const DyadicInterval& J,
                   const GridOpenSet* enlarged) {
  GridOpenSet local(0, 0);
  if (!enlarged) {
    local = enlarge(omega);
    enlarged = &local;
  }
  const auto& tilde = *enlarged;
  if (J.left() >= tilde.window() || J.right() <= 0) return 0;
  const double h = tilde.cell_size();
  const int r0 = std::max(0, static_cast<int>(std::floor(J.left() / h)));
  const int r1 = std::min(tilde.side(),
                          static_cast<int>(std::ceil(J.right() / h)));
  if (r0 >= r1) return 0;
  const int S = tilde.side();
  std::vector<std::uint8_t> covered(S, 0);
  for (int n = tilde.L(); n >= -tilde.K(); --n) {
    const int w = 1 << (n + tilde.K());
    for (int c0 = 0; c0 < S; c0 += w) {
      const std::int64_t area = static_cast<std::int64_t>(r1 - r0) * w;
      if (tilde.count(r0, r1, c0, c0 + w) == area)
        std::fill(covered.begin() + c0, covered.begin() + c0 + w, std::uint8_t{1});
    }
  }
  std::int64_t marked = 0;
  for (std::uint8_t b : covered) marked += b;
  return static_cast<double>(marked) * h;
}

double StepFunction::l1() const {
  double s = 0;
  for (double v : values) s += v;
  return s * cell_size();
}

CountingResult counting_sum(const StepFunction& g, double x, double lambda) {
  if (!(lambda >= 1)) throw std::invalid_argument("lambda must be >= 1");
  const int S = 1 << (g.L + g.K);
  if (static_cast<int>(g.values.size()) != S)
    throw std::invalid_argument("step function size mismatch");
  for (double v : g.values)
    if (v < 0) throw std::invalid_argument("g must be nonnegative");

  CountingResult res{0.0, 6.0 * lambda * g.l1()};
  std::vector<double> level = g.values;
  for (int n = -g.K; n <= g.L; ++n) {
    if (n > -g.K) {
      std::vector<double> up(level.size() / 2);
      for (std::size_t i = 0; i < up.size(); ++i)
        up[i] = std::min(level[2 * i], level[2 * i + 1]);
      level = std::move(up);
    }
    const double w = std::ldexp(1.0, n);
    for (std::size_t i = 0; i < level.size(); ++i) {
      const double inf = level[i];
      if (inf <= 0) continue;
      const double c = (static_cast<double>(i) + 0.5) * w;
      const double lw = lambda * w;
      if (x >= c - 0.5 * lw && x < c + 0.5 * lw) res.sum += w * inf;
    }
  }
  return res;
}

RealInterval dilate(const DyadicInterval& I, double factor) {
  const double c = I.center();
  const double hw = 0.5 * factor * I.length();
  return {c - hw, c + hw};
}

std::vector<RealInterval> annulus(const DyadicInterval& I, int u) {
  if (u == 0) return {dilate(I, 8.0)};
  if (u < 4) throw std::invalid_argument("excluded annulus index");
  const double c = I.center();
  const double outer = std::ldexp(I.length(), u - 1);
  const double inner = std::ldexp(I.length(), u - 2);
  return {{c - outer, c - inner}, {c + inner, c + outer}};
}

std::vector<RealInterval> clip_to_window(const std::vector<RealInterval>& pieces,
                                         double window) {
  std::vector<RealInterval> out;
  for (const auto& p : pieces) {
    const double lo = std::max(p.lo, 0.0);
    const double hi = std::min(p.hi, window);
    if (hi > lo) out.push_back({lo, hi});
  }
  return out;
}

std::shared_ptr<const GridOpenSet> EnlargementCache::get(const GridOpenSet& omega) {
  const std::uint64_t h = omega.mask_hash();
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(h);
    if (it != map_.end())
      for (const auto& [key, value] : it->second)
        if (key->L() == omega.L() && key->K() == omega.K() &&
            key->mask() == omega.mask())
          return value;
  }
  auto key = std::make_shared<const GridOpenSet>(omega);
  auto value = std::make_shared<const GridOpenSet>(enlarge(omega));
  std::lock_guard<std::mutex> lock(mu_);
  auto& bucket = map_[h];
  for (const auto& [k, v] : bucket)
    if (k->L() == omega.L() && k->K() == omega.K() && k->mask() == omega.mask())
      return v;  // another thread filled it first
  bucket.emplace_back(key, value);
  return value;
}

}  // namespace lab::dyadic
