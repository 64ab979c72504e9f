#include "lab/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lab/rng.hpp"

namespace lab::atoms {

using spectral::Complex;
using spectral::GridFunction;

namespace {

// sample index span of [lo, hi) clipped to the window, samples at x = i*h
std::pair<int, int> index_span(double lo, double hi, double h, int M) {
  const int i0 = std::max(0, static_cast<int>(std::ceil(lo / h)));
  const int i1 = std::min(M, static_cast<int>(std::ceil(hi / h)));
  return {i0, std::max(i0, i1)};
}

std::pair<int, int> triple_span(const dyadic::DyadicInterval& I, double h, int M) {
  return index_span(I.center() - 1.5 * I.length(), I.center() + 1.5 * I.length(), h, M);
}

}  // namespace

AtomPiece make_piece(const dyadic::DyadicRectangle& R, PiecePattern pattern,
                     std::uint64_t seed, int L, int Kp, int direction) {
  if (direction != 1 && direction != 2)
    throw std::invalid_argument("direction must be 1 or 2");
  GridFunction values(L, Kp);
  const int M = values.M();
  const double h = values.cell_size(), T = values.period();
  if (R.first.left() < 0 || R.first.right() > T || R.second.left() < 0 ||
      R.second.right() > T)
    throw std::invalid_argument("rectangle outside window");

  if (pattern == PiecePattern::haar) {
    if (R.first.n - 1 < -Kp || R.second.n - 1 < -Kp)
      throw std::invalid_argument("grid too coarse for piece");
    const auto [c0, c1] = index_span(R.first.left(), R.first.right(), h, M);
    const auto [r0, r1] = index_span(R.second.left(), R.second.right(), h, M);
    for (int i2 = r0; i2 < r1; ++i2)
      for (int i1 = c0; i1 < c1; ++i1) {
        const double s1 = i1 * h < R.first.center() ? 1.0 : -1.0;
        const double s2 = i2 * h < R.second.center() ? 1.0 : -1.0;
        values.at(i1, i2) = Complex{s1 * s2, 0.0};
      }
  } else {
    const auto [c0, c1] = triple_span(R.first, h, M);
    const auto [r0, r1] = triple_span(R.second, h, M);
    const int rows = r1 - r0, cols = c1 - c0;
    Rng rng(Rng::mix(seed, 0x9a7));
    std::vector<double> block(static_cast<std::size_t>(rows) * cols);
    for (auto& v : block) v = rng.uniform(-1.0, 1.0);
    // exact cancellation: remove row means, then column means
    for (int r = 0; r < rows; ++r) {
      double mean = 0;
      for (int c = 0; c < cols; ++c) mean += block[static_cast<std::size_t>(r) * cols + c];
      mean /= cols;
      for (int c = 0; c < cols; ++c) block[static_cast<std::size_t>(r) * cols + c] -= mean;
    }
    for (int c = 0; c < cols; ++c) {
      double mean = 0;
      for (int r = 0; r < rows; ++r) mean += block[static_cast<std::size_t>(r) * cols + c];
      mean /= rows;
      for (int r = 0; r < rows; ++r) block[static_cast<std::size_t>(r) * cols + c] -= mean;
    }
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        values.at(c0 + c, r0 + r) =
            Complex{block[static_cast<std::size_t>(r) * cols + c], 0.0};
  }
  return AtomPiece{R, std::move(values), direction};
}

Atom assemble_atom(const dyadic::GridOpenSet& omega, std::vector<AtomPiece> pieces,
                   double q, double delta) {
  if (!(q > 1.0 && q < 2.0)) throw std::invalid_argument("q must be in (1,2)");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  for (const auto& piece : pieces) {
    if (piece.values.L() != omega.L())
      throw std::invalid_argument("piece window mismatch");
    if (piece.values.Kp() < omega.K())
      throw std::invalid_argument("piece grid coarser than the open set");
  }

  GridFunction presum = pieces.empty()
                            ? GridFunction(omega.L(), omega.K() + 1)
                            : GridFunction(pieces[0].values.L(), pieces[0].values.Kp());
  double weighted_q = 0;
  if (!pieces.empty()) {
    const dyadic::GridOpenSet tilde = dyadic::enlarge(omega);
    std::vector<dyadic::DyadicRectangle> maximal[3];
    maximal[1] = dyadic::maximal_rects(omega, 1);
    maximal[2] = dyadic::maximal_rects(omega, 2);
    for (const auto& piece : pieces) {
      const auto& family = maximal[piece.direction];
      if (std::find(family.begin(), family.end(), piece.rect) == family.end())
        throw std::invalid_argument("piece not adapted");
      const auto emb = dyadic::embed(piece.rect, omega, piece.direction, &tilde);
      weighted_q += std::pow(emb.gamma, -delta) * std::pow(piece.values.lq(q), q);
      presum += piece.values;
    }
  }
  const double weighted = std::pow(weighted_q, 1.0 / q);
  const double global = presum.lq(q);
  const double denom = std::max(weighted, global);
  double scale = 1.0;
  if (denom > 0) {
    const double target = std::pow(omega.measure(), 1.0 / q - 1.0);
    scale = target / denom;
  }
  for (auto& piece : pieces) piece.values *= Complex{scale, 0};
  // summed after scaling so a reload from piece files reproduces it exactly
  GridFunction total(presum.L(), presum.Kp());
  for (const auto& piece : pieces) total += piece.values;
  return Atom{omega, std::move(pieces), q, delta, scale, std::move(total)};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double weighted_sum(const Atom& a, double delta, const dyadic::GridOpenSet& tilde) {
  double acc = 0;
  for (const auto& piece : a.pieces) {
    const auto emb = dyadic::embed(piece.rect, a.omega, piece.direction, &tilde);
    acc += std::pow(emb.gamma, -delta) * std::pow(piece.values.lq(a.q), a.q);
  }
  return std::pow(acc, 1.0 / a.q);
}

}  // namespace

AtomReport validate_atom(const Atom& a) {
  AtomReport rep;
  const GridFunction& total = a.total;
  const int M = total.M();
  const double h = total.cell_size();

  bool zero = true;
  for (const auto& z : total.samples())
    if (z != Complex{0, 0}) {
      zero = false;
      break;
    }
  if (zero && a.pieces.empty()) {
    rep.global_margin = rep.weighted_margin = kInf;
    for (double d : {0.25, 0.5, 1.0}) rep.delta_sweep.emplace_back(d, 0.0);
    return rep;
  }

  // support against the union of (3R clipped to window) over member pieces,
  // and the discrepancy measure against Omega itself
  std::vector<std::uint8_t> allowed(static_cast<std::size_t>(M) * M, 0);
  for (const auto& piece : a.pieces) {
    const auto [c0, c1] = triple_span(piece.rect.first, h, M);
    const auto [r0, r1] = triple_span(piece.rect.second, h, M);
    for (int i2 = r0; i2 < r1; ++i2)
      for (int i1 = c0; i1 < c1; ++i1)
        allowed[static_cast<std::size_t>(i2) * M + i1] = 1;
  }
  const int shift = total.Kp() - a.omega.K();
  std::int64_t stray = 0, outside_omega = 0;
  for (int i2 = 0; i2 < M; ++i2)
    for (int i1 = 0; i1 < M; ++i1) {
      if (total.at(i1, i2) == Complex{0, 0}) continue;
      if (!allowed[static_cast<std::size_t>(i2) * M + i1]) ++stray;
      if (!a.omega.cell(i2 >> shift, i1 >> shift)) ++outside_omega;
    }
  rep.stray_measure = static_cast<double>(stray) * h * h;
  rep.omega_discrepancy = static_cast<double>(outside_omega) * h * h;
  rep.support_ok = stray == 0;

  const double target = std::pow(a.omega.measure(), 1.0 / a.q - 1.0);
  const double global = total.lq(a.q);
  rep.global_ok = global <= target * (1.0 + 1e-10);
  rep.global_margin = global > 0 ? target / global - 1.0 : kInf;

  const dyadic::GridOpenSet tilde = dyadic::enlarge(a.omega);
  const double weighted = weighted_sum(a, a.delta, tilde);
  rep.weighted_ok = weighted <= target * (1.0 + 1e-10);
  rep.weighted_margin = weighted > 0 ? target / weighted - 1.0 : kInf;
  for (double d : {0.25, 0.5, 1.0})
    rep.delta_sweep.emplace_back(d, weighted_sum(a, d, tilde) / target);

  for (const auto& piece : a.pieces)
    rep.cancellation_worst =
        std::max(rep.cancellation_worst, spectral::cancellation_residual(piece.values));
  rep.cancellation_ok = rep.cancellation_worst <= 1e-12;
  return rep;
}

std::complex<double> pair(const GridFunction& f, const Atom& a) {
  if (a.pieces.empty()) return {0, 0};
  return spectral::inner(f, a.total);
}

BoundCheck piece_bound_check(const std::vector<double>& sp_pow, const GridFunction& f,
                             const AtomPiece& piece, double p) {
  if (!(p > 2.0)) throw std::invalid_argument("p must be > 2");
  if (f.L() != piece.values.L() || f.Kp() != piece.values.Kp())
    throw std::invalid_argument("grid mismatch");
  const double q = p / (p - 1.0);
  const int M = f.M();
  const double h = f.cell_size(), T = f.period();

  BoundCheck out;
  out.lhs = std::abs(spectral::inner(f, piece.values));

  const spectral::RegionIntegrator integ(sp_pow, M);
  const int ucap = spectral::annulus_cap(piece.rect.first, T);
  const int vcap = spectral::annulus_cap(piece.rect.second, T);
  double sum = 0;
  for (int u = 0; u <= ucap; u = (u == 0 ? 4 : u + 1)) {
    const auto cols = spectral::annulus_index_ranges(piece.rect.first, u, T, M);
    for (int v = 0; v <= vcap; v = (v == 0 ? 4 : v + 1)) {
      const auto rows = spectral::annulus_index_ranges(piece.rect.second, v, T, M);
      const double integral = integ.sum(cols, rows) * h * h;
      sum += std::pow(2.0, -(u + v) / q) * std::pow(integral, 1.0 / p);
    }
  }
  out.rhs = std::pow(piece.rect.area(), 1.0 / p) * piece.values.lq(q) * sum;
  out.ratio = out.rhs > 0 ? out.lhs / out.rhs : 0.0;
  return out;
}

BoundCheck piece_bound_check(const GridFunction& f, const AtomPiece& piece, double p) {
  return piece_bound_check(spectral::square_function_pow(f, p), f, piece, p);
}

BoundCheck atom_bound_check(double besov, const GridFunction& f, const Atom& a,
                            double p) {
  if (!(p > 2.0)) throw std::invalid_argument("p must be > 2");
  if (!validate_atom(a).ok()) throw std::invalid_argument("invalid atom");
  BoundCheck out;
  out.lhs = std::abs(pair(f, a));
  out.rhs = besov;
  out.ratio = out.rhs > 0 ? out.lhs / out.rhs : 0.0;
  return out;
}

BoundCheck atom_bound_check(const GridFunction& f, const Atom& a, double p) {
  return atom_bound_check(spectral::besov_norm(f, p), f, a, p);
}

}  // namespace lab::atoms
