#pragma once

// Littlewood-Paley analysis on the periodic grid: smooth dyadic bumps and
// their telescoping partition of unity, frequency-block projectors, the
// reproducing formula, square function and Besov norm, analytic projection,
// and the annular decay quantities used by the pairing estimates.
//
// The model is the torus of side 2^L sampled at x = i * 2^-K' with
// M = 2^(L+K') points per axis; the frequency lattice is xi = k / 2^L for
// integer k in [-M/2, M/2). Samples are row-major with row = x2, col = x1.

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "lab/dyadic.hpp"

namespace lab::spectral {

using Complex = std::complex<double>;

int index_of_freq(int k, int M);
int freq_of_index(int idx, int M);

class GridFunction {
 public:
  GridFunction(int L, int Kp);  // identically zero
  GridFunction(int L, int Kp, std::vector<Complex> samples);
  static GridFunction from_spectrum(int L, int Kp, std::vector<Complex> coeffs);

  int L() const { return L_; }
  int Kp() const { return Kp_; }
  int M() const { return M_; }
  double cell_size() const { return std::ldexp(1.0, -Kp_); }
  double period() const { return std::ldexp(1.0, L_); }
  double area() const { return period() * period(); }

  Complex at(int i1, int i2) const { return samples_[static_cast<std::size_t>(i2) * M_ + i1]; }
  Complex& at(int i1, int i2) { return samples_[static_cast<std::size_t>(i2) * M_ + i1]; }
  const std::vector<Complex>& samples() const { return samples_; }
  std::vector<Complex>& samples() { return samples_; }

  // Fourier coefficients c_k (natural DFT index order), f = sum c_k e^{2 pi i k.x/T}.
  std::vector<Complex> spectrum() const;

  double lq(double q) const;  // quadrature L^q norm over the window
  double l2() const { return lq(2.0); }

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(Complex c);
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(Complex c, GridFunction f) { return f *= c; }

 private:
  int L_ = 0, Kp_ = 0, M_ = 1;
  std::vector<Complex> samples_;
};

// Window inner product <f, g> = integral of f * conj(g), by quadrature and by
// the spectral (Parseval) sum. The two must agree; tests rely on both routes.
Complex inner(const GridFunction& f, const GridFunction& g);
Complex spectral_inner(const GridFunction& f, const GridFunction& g);
double spectral_l2(const GridFunction& f);

// e^{2 pi i (k1 x1 + k2 x2) / T}
GridFunction pure_tone(int L, int Kp, int k1, int k2);

// Same function one resolution step finer (Kp+1): cell-replicated samples
// (exact for piecewise-constant data) or zero-padded spectrum (exact for
// band-limited data).
GridFunction refine_samples(const GridFunction& f);
GridFunction refine_spectrum(const GridFunction& f);

// Smooth dyadic bumps from the telescoping construction
//   eta(t) = h(2-t) / (h(2-t) + h(t-1)),  h(s) = exp(-1/s) for s > 0,
//   psi(t) = eta(t) - eta(2t),            supp psi  in [1/2, 2], psi(1) = 1,
//   psi~(t) = eta(t/2) - eta(4t),         supp psi~ in [1/4, 4], == 1 on [1/2, 2].
struct SpectralBump {
  double eta(double t) const;
  double psi(double t) const;
  double psi_tilde(double t) const;
  // psi(2^-j xi) and psi~(2^-j xi), zero for xi <= 0
  double psi_scaled(int j, double xi) const;
  double psi_tilde_scaled(int j, double xi) const;
  // convolution kernel of the (0,0) tilde block on the given grid
  GridFunction kernel(int L, int Kp) const;
};

SpectralBump build_bumps();
const SpectralBump& default_bumps();

struct BlockIndex {
  int i = 0;
  int j = 0;
};

// Frequency scales whose bump support meets the positive lattice frequencies;
// blocks outside [lo, hi] are identically zero on the grid.
std::pair<int, int> covered_scales(int L, int Kp);

enum class BumpKind { plain, tilde };
enum class BlockAxis { first, second, both };

GridFunction block_project(const GridFunction& f, BlockIndex b,
                           BumpKind kind = BumpKind::plain,
                           BlockAxis axis = BlockAxis::both,
                           const SpectralBump& bump = default_bumps());

struct ReproduceResult {
  GridFunction reconstruction;
  double relative_error = 0;
};

// Sum over covered blocks of Delta~_{i,j} Delta_{i,j} f; requires spectrum
// supported in the open positive quadrant.
ReproduceResult reproduce(const GridFunction& f,
                          const SpectralBump& bump = default_bumps());

// S_p(f)(x)^p = sum_{i,j} 2^{i+j} |Delta_{i,j} f(x)|^p, returned per cell.
std::vector<double> square_function_pow(const GridFunction& f, double p,
                                        const SpectralBump& bump = default_bumps());
GridFunction square_function(const GridFunction& f, double p,
                             const SpectralBump& bump = default_bumps());
double besov_norm(const GridFunction& f, double p,
                  const SpectralBump& bump = default_bumps());

GridFunction analytic_project(const GridFunction& f);
GridFunction involution(const GridFunction& f);

// Axis-parallel rectangle, interpreted on the torus (coordinates wrap mod T).
struct Rect {
  double x1lo = 0, x1hi = 0;
  double x2lo = 0, x2hi = 0;
};

// L^q norm of f over a union of rectangles (cells counted once).
double local_norm(const GridFunction& f, const std::vector<Rect>& region, double q);

// Torus-wrapped sample index ranges of the annulus E_u(I): the ring between
// the concentric dilates, widths capped at the period so that the annuli
// u = 0, 4, 5, ... tile the torus exactly.
std::vector<std::pair<int, int>> annulus_index_ranges(const dyadic::DyadicInterval& I,
                                                      int u, double period, int M);
std::vector<Rect> annulus_region(const dyadic::DyadicRectangle& R, int u, int v,
                                 double period);
// Largest u worth including: beyond it the annulus is empty on the torus.
int annulus_cap(const dyadic::DyadicInterval& I, double period);

// Prefix-summed nonnegative cell field for O(1) rectangle sums.
class RegionIntegrator {
 public:
  RegionIntegrator(const std::vector<double>& cell_values, int M);
  double sum(const std::vector<std::pair<int, int>>& col_ranges,
             const std::vector<std::pair<int, int>>& row_ranges) const;

 private:
  int M_;
  std::vector<double> prefix_;
};

struct DecayProfile {
  double m = 0;      // min(1, 2^i |I|)
  double theta = 0;  // 1 for u = 0, (1 + 2^u 2^i |I|)^-M for u >= 4
};

DecayProfile decay_profile(int i, const dyadic::DyadicInterval& I, int u, double M);

// Support-in-3R plus both cancellation conditions; used by the decay check
// and by the atom validator.
bool piece_supported_in_3r(const GridFunction& a, const dyadic::DyadicRectangle& R);
double cancellation_residual(const GridFunction& a);  // relative to ||a||_1

// ||Delta~*_{i,j} a_R||_{L^q(E_{u,v}(R))} / (m_i m_j theta_u theta_v ||a_R||_q).
double annular_decay_check(const GridFunction& piece, const dyadic::DyadicRectangle& R,
                           BlockIndex b, int u, int v, double q, double decay_m,
                           const SpectralBump& bump = default_bumps());

// Caches the forward transform of one function so that many block projections
// of it cost a single inverse transform each. Not safe to share across
// threads; create one per task.
class BlockSweep {
 public:
  explicit BlockSweep(const GridFunction& f,
                      const SpectralBump& bump = default_bumps());
  GridFunction project(BlockIndex b, BumpKind kind) const;

 private:
  const SpectralBump& bump_;
  int L_, Kp_, M_;
  std::vector<Complex> forward_;  // unnormalized
  mutable std::vector<std::vector<double>> weight_cache_[2];
  const std::vector<double>& weights(int scale, BumpKind kind) const;
};

// A_u(I) = (sum_i [2^{-i/p} m_i(I) theta_u(i,I)]^q)^{1/q}, q dual to p,
// by direct summation with the tails truncated below 1e-18.
double a_u(const dyadic::DyadicInterval& I, int u, double p, double decay_m);

}  // namespace lab::spectral
