#pragma once

// Lq-normalized atoms adapted to a grid open set: rectangle pieces with exact
// row/column cancellation supported in 3R, assembly with the gamma-weighted
// normalization, the validator, the dual pairing, and the pairing bounds.

#include <complex>
#include <cstdint>
#include <vector>

#include "lab/dyadic.hpp"
#include "lab/spectral.hpp"

namespace lab::atoms {

struct AtomPiece {
  dyadic::DyadicRectangle rect;
  spectral::GridFunction values;
  int direction = 2;  // maximal family the rectangle belongs to (1 or 2)
};

enum class PiecePattern { haar, random_cancellative };

// Piece supported in 3R (clipped to the window) with machine-exact row and
// column cancellation. The Haar pattern is the tensor h_I (x) h_J extended by
// zero; the random pattern is a seeded field with row means then column means
// subtracted.
AtomPiece make_piece(const dyadic::DyadicRectangle& R, PiecePattern pattern,
                     std::uint64_t seed, int L, int Kp, int direction = 2);

struct Atom {
  dyadic::GridOpenSet omega;
  std::vector<AtomPiece> pieces;  // already rescaled
  double q = 1.5;
  double delta = 1.0;
  double scale = 1.0;  // factor applied at assembly
  spectral::GridFunction total;
};

// Rescales the pieces by |Omega|^{1/q-1} / max(N, G), where N is the
// gamma-weighted piece-norm sum and G the global Lq norm, so the binding
// bound holds with constant exactly 1.
Atom assemble_atom(const dyadic::GridOpenSet& omega, std::vector<AtomPiece> pieces,
                   double q, double delta);

struct AtomReport {
  bool support_ok = true;        // supp a inside union of 3R over member pieces
  bool global_ok = true;         // ||a||_q <= |Omega|^{1/q-1}
  bool weighted_ok = true;       // N(delta) <= |Omega|^{1/q-1}
  bool cancellation_ok = true;   // piece residuals <= 1e-12 relative
  double stray_measure = 0;      // |supp a \ union 3R|
  double omega_discrepancy = 0;  // |supp a \ Omega|, reported not enforced
  double global_margin = 0;      // target / actual - 1
  double weighted_margin = 0;
  double cancellation_worst = 0;
  // (delta, N(delta)/target) over the sweep {1/4, 1/2, 1}
  std::vector<std::pair<double, double>> delta_sweep;
  bool ok() const { return support_ok && global_ok && weighted_ok && cancellation_ok; }
};

AtomReport validate_atom(const Atom& a);

// <f, a> over the window by quadrature.
std::complex<double> pair(const spectral::GridFunction& f, const Atom& a);

struct BoundCheck {
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;
};

// |<f, a_R>| against |R|^{1/p} ||a_R||_q sum_{u,v} 2^{-(u+v)/q}
// (int_{E_{u,v}(R)} S_p(f)^p)^{1/p}, with q dual to p > 2.
BoundCheck piece_bound_check(const spectral::GridFunction& f, const AtomPiece& piece,
                             double p);
// Same with S_p(f)^p precomputed (one square function, many pieces).
BoundCheck piece_bound_check(const std::vector<double>& sp_pow,
                             const spectral::GridFunction& f, const AtomPiece& piece,
                             double p);

// |<f, a>| against ||f||_{B^{1/p}_{p,p}}.
BoundCheck atom_bound_check(const spectral::GridFunction& f, const Atom& a, double p);
BoundCheck atom_bound_check(double besov, const spectral::GridFunction& f,
                            const Atom& a, double p);

}  // namespace lab::atoms
