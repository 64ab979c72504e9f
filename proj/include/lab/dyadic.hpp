#pragma once

// Product-dyadic geometry on a finite grid: dyadic intervals and rectangles,
// open sets as boolean cell masks inside the window [0, 2^L)^2 at base
// resolution 2^-K, maximal rectangle families, strong-maximal enlargement,
// embeddedness constants, and the packing / counting sums built from them.
//
// All values are immutable after construction and every operation is a pure
// function of its inputs, so everything here may be called concurrently.

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lab::dyadic {

// Dyadic interval [m*2^n, (m+1)*2^n). Scales are exponents, so all derived
// quantities (length, endpoints, center) are exact doubles.
struct DyadicInterval {
  std::int64_t m = 0;
  int n = 0;

  double length() const { return std::ldexp(1.0, n); }
  double left() const { return std::ldexp(static_cast<double>(m), n); }
  double right() const { return std::ldexp(static_cast<double>(m + 1), n); }
  double center() const { return std::ldexp(static_cast<double>(2 * m + 1), n - 1); }

  bool contains(double x) const { return x >= left() && x < right(); }
  // other subseteq this; dyadic intervals are nested or disjoint.
  bool contains(const DyadicInterval& other) const;
  DyadicInterval parent() const { return {m >> 1, n + 1}; }

  bool operator==(const DyadicInterval&) const = default;
};

struct DyadicRectangle {
  DyadicInterval first;   // x1 side (I)
  DyadicInterval second;  // x2 side (J)

  double area() const { return std::ldexp(1.0, first.n + second.n); }
  bool operator==(const DyadicRectangle&) const = default;
};

struct Point {
  double x1 = 0;
  double x2 = 0;
};

struct RealInterval {
  double lo = 0;
  double hi = 0;
  double length() const { return hi > lo ? hi - lo : 0.0; }
};

// Open set inside the window [0, 2^L)^2, stored as a boolean mask over base
// cells of side 2^-K. mask[row*side + col]: row indexes x2, col indexes x1.
class GridOpenSet {
 public:
  GridOpenSet(int L, int K);  // empty set
  GridOpenSet(int L, int K, std::vector<std::uint8_t> mask);
  static GridOpenSet from_cells(int L, int K,
                                const std::vector<std::pair<int, int>>& cells);
  static GridOpenSet union_of(int L, int K,
                              const std::vector<DyadicRectangle>& rects);

  int L() const { return L_; }
  int K() const { return K_; }
  int side() const { return side_; }
  double cell_size() const { return std::ldexp(1.0, -K_); }
  double window() const { return std::ldexp(1.0, L_); }

  bool cell(int row, int col) const { return mask_[static_cast<std::size_t>(row) * side_ + col] != 0; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  std::int64_t cell_count() const { return count_; }
  double measure() const { return std::ldexp(static_cast<double>(count_), -2 * K_); }
  bool empty() const { return count_ == 0; }

  // Number of true cells in the half-open cell rectangle [r0,r1) x [c0,c1).
  std::int64_t count(int r0, int r1, int c0, int c1) const;
  bool contains_rect(const DyadicRectangle& r) const;
  // Cell index span of a dyadic interval; valid only for n >= -K.
  std::pair<int, int> cell_span(const DyadicInterval& iv) const;
  bool in_window(const DyadicInterval& iv) const;
  bool in_window(const DyadicRectangle& r) const;

  // Same set one dyadic scale finer (K+1); each cell becomes a 2x2 block.
  GridOpenSet refined() const;

  std::uint64_t mask_hash() const { return hash_; }
  std::vector<std::pair<int, int>> cells() const;

 private:
  void finalize();

  int L_ = 0, K_ = 0, side_ = 1;
  std::vector<std::uint8_t> mask_;
  std::vector<std::int64_t> prefix_;  // (side+1)^2 inclusion sums
  std::int64_t count_ = 0;
  std::uint64_t hash_ = 0;
};

// Maximal dyadic sub-rectangle family of an open set. direction = 1 returns
// the rectangles whose first side I is maximal (M1), direction = 2 those
// whose second side J is maximal (M2). Every dyadic rectangle contained in
// the set down to base scale is below exactly the emitted maximal ones.
std::vector<DyadicRectangle> maximal_rects(const GridOpenSet& omega, int direction);

enum class MaximalVariant {
  dyadic,         // sup over dyadic rectangles containing the point
  aligned_rects,  // sup over all cell-aligned axis-parallel rectangles (slow; cross-checks)
};

// Journe enlargement: cells where the strong maximal function of the
// indicator exceeds 1/2. The dyadic variant is the default everywhere.
GridOpenSet enlarge(const GridOpenSet& omega,
                    MaximalVariant variant = MaximalVariant::dyadic);

struct EmbeddedRectangle {
  DyadicRectangle rect;
  DyadicInterval hat;  // maximal extension of the side opposite to `direction`
  double gamma = 1.0;  // |hat| / |side|, a power of two
  int direction = 2;
};

// For R in M2 (direction = 2): hat is the maximal dyadic Ihat containing I
// with Ihat x J inside the enlargement; gamma = |Ihat|/|I|. Symmetric for
// direction = 1. The dyadic ancestors of I form a chain, so hat is unique.
// Pass `enlarged` to reuse a cached enlargement.
EmbeddedRectangle embed(const DyadicRectangle& r, const GridOpenSet& omega,
                        int direction, const GridOpenSet* enlarged = nullptr);

// maximal_rects + embed for the whole family, computing the enlargement once.
std::vector<EmbeddedRectangle> embed_all(const GridOpenSet& omega, int direction,
                                         const GridOpenSet* enlarged = nullptr);

// Packing sum  sum_{R in M_d(omega)} gamma(R)^(-delta) |R|.
double journe_sum(const GridOpenSet& omega, double delta, int direction);
double journe_sum(const std::vector<EmbeddedRectangle>& family, double delta);

// Local summability sum over R = I x J in M2(omega) with x in 2^u I x 2^v J
// of gamma(R)^beta |R|; requires beta in (0,1).
double geometric_sum(const GridOpenSet& omega, Point x, int u, int v, double beta);
double geometric_sum(const std::vector<EmbeddedRectangle>& family, Point x, int u,
                     int v, double beta);

// g(y) = measure of the horizontal slice of the set at height y.
double slice_measure(const GridOpenSet& set, double y);

// Measure of F_J = union of maximal dyadic Ihat with Ihat x J inside the
// enlargement of omega.
double f_j_measure(const GridOpenSet& omega, const DyadicInterval& J,
                   const GridOpenSet* enlarged = nullptr);

// Nonnegative step function on the 1-D grid of the window (2^(L+K) cells of
// width 2^-K over [0, 2^L)).
struct StepFunction {
  int L = 0;
  int K = 0;
  std::vector<double> values;

  double cell_size() const { return std::ldexp(1.0, -K); }
  double l1() const;
};

struct CountingResult {
  double sum = 0;
  double bound = 0;
};

// sum over dyadic J in the window scale range with x in lambda*J and
// inf_J g > 0 of |J| inf_J g, together with the bound 6 lambda ||g||_1.
CountingResult counting_sum(const StepFunction& g, double x, double lambda);

// Annulus of an interval: u = 0 gives the concentric dilate 8I, u >= 4 gives
// 2^u I minus 2^(u-1) I (two pieces). u in {1,2,3} is excluded.
std::vector<RealInterval> annulus(const DyadicInterval& I, int u);

// Concentric dilate c*I as a real interval.
RealInterval dilate(const DyadicInterval& I, double factor);

// Window-clipping helper for annulus pieces.
std::vector<RealInterval> clip_to_window(const std::vector<RealInterval>& pieces,
                                         double window);

// Write-once enlargement cache keyed by the mask hash (mask bytes compared on
// hit, so colliding hashes stay correct).
class EnlargementCache {
 public:
  std::shared_ptr<const GridOpenSet> get(const GridOpenSet& omega);

 private:
  std::mutex mu_;
  std::unordered_map<std::uint64_t,
                     std::vector<std::pair<std::shared_ptr<const GridOpenSet>,
                                           std::shared_ptr<const GridOpenSet>>>>
      map_;  // (key set, enlarged set) pairs per hash bucket
};

}  // namespace lab::dyadic
