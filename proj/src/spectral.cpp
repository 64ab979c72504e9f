#include "lab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lab/fft.hpp"

namespace lab::spectral {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

int index_of_freq(int k, int M) { return k >= 0 ? k : k + M; }

int freq_of_index(int idx, int M) { return idx < M / 2 ? idx : idx - M; }

GridFunction::GridFunction(int L, int Kp) : GridFunction(L, Kp, {}) {}

GridFunction::GridFunction(int L, int Kp, std::vector<Complex> samples)
    : L_(L), Kp_(Kp), samples_(std::move(samples)) {
  if (L < 0 || Kp < 0 || L + Kp < 1 || L + Kp > 12)
    throw std::invalid_argument("GridFunction: bad resolution exponents");
  M_ = 1 << (L_ + Kp_);
  const std::size_t n = static_cast<std::size_t>(M_) * M_;
  if (samples_.empty()) samples_.assign(n, Complex{0, 0});
  if (samples_.size() != n)
    throw std::invalid_argument("GridFunction: sample count mismatch");
}

GridFunction GridFunction::from_spectrum(int L, int Kp, std::vector<Complex> coeffs) {
  GridFunction f(L, Kp, std::move(coeffs));
  detail::dft2(f.samples_, f.M_, f.M_, +1);
  return f;
}

std::vector<Complex> GridFunction::spectrum() const {
  std::vector<Complex> F = samples_;
  detail::dft2(F, M_, M_, -1);
  const double scale = 1.0 / (static_cast<double>(M_) * M_);
  for (auto& c : F) c *= scale;
  return F;
}

double GridFunction::lq(double q) const {
  if (!(q >= 1.0)) throw std::invalid_argument("q must be >= 1");
  double acc = 0;
  for (const auto& z : samples_) acc += std::pow(std::norm(z), 0.5 * q);
  const double h = cell_size();
  return std::pow(acc * h * h, 1.0 / q);
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  if (L_ != other.L_ || Kp_ != other.Kp_)
    throw std::invalid_argument("grid mismatch");
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  if (L_ != other.L_ || Kp_ != other.Kp_)
    throw std::invalid_argument("grid mismatch");
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= other.samples_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(Complex c) {
  for (auto& z : samples_) z *= c;
  return *this;
}

Complex inner(const GridFunction& f, const GridFunction& g) {
  if (f.L() != g.L() || f.Kp() != g.Kp())
    throw std::invalid_argument("grid mismatch");
  Complex acc{0, 0};
  const auto& a = f.samples();
  const auto& b = g.samples();
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
  const double h = f.cell_size();
  return acc * (h * h);
}

Complex spectral_inner(const GridFunction& f, const GridFunction& g) {
  if (f.L() != g.L() || f.Kp() != g.Kp())
    throw std::invalid_argument("grid mismatch");
  const auto a = f.spectrum();
  const auto b = g.spectrum();
  Complex acc{0, 0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
  return acc * f.area();
}

double spectral_l2(const GridFunction& f) {
  const auto c = f.spectrum();
  double acc = 0;
  for (const auto& z : c) acc += std::norm(z);
  return std::sqrt(acc * f.area());
}

GridFunction pure_tone(int L, int Kp, int k1, int k2) {
  GridFunction f(L, Kp);
  const int M = f.M();
  for (int i2 = 0; i2 < M; ++i2)
    for (int i1 = 0; i1 < M; ++i1) {
      const long long phase = static_cast<long long>(k1) * i1 +
                              static_cast<long long>(k2) * i2;
      const long long r = ((phase % M) + M) % M;
      f.at(i1, i2) = std::polar(1.0, kTwoPi * static_cast<double>(r) / M);
    }
  return f;
}

GridFunction refine_samples(const GridFunction& f) {
  const int M = f.M();
  GridFunction out(f.L(), f.Kp() + 1);
  for (int i2 = 0; i2 < M; ++i2)
    for (int i1 = 0; i1 < M; ++i1) {
      const Complex v = f.at(i1, i2);
      out.at(2 * i1, 2 * i2) = v;
      out.at(2 * i1 + 1, 2 * i2) = v;
      out.at(2 * i1, 2 * i2 + 1) = v;
      out.at(2 * i1 + 1, 2 * i2 + 1) = v;
    }
  return out;
}

GridFunction refine_spectrum(const GridFunction& f) {
  const int M = f.M();
  const int M2 = 2 * M;
  const auto coeffs = f.spectrum();
  std::vector<Complex> padded(static_cast<std::size_t>(M2) * M2, Complex{0, 0});
  for (int idx2 = 0; idx2 < M; ++idx2)
    for (int idx1 = 0; idx1 < M; ++idx1) {
      const int k1 = freq_of_index(idx1, M), k2 = freq_of_index(idx2, M);
      padded[static_cast<std::size_t>(index_of_freq(k2, M2)) * M2 +
             index_of_freq(k1, M2)] =
          coeffs[static_cast<std::size_t>(idx2) * M + idx1];
    }
  return GridFunction::from_spectrum(f.L(), f.Kp() + 1, std::move(padded));
}

double SpectralBump::eta(double t) const {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  auto h = [](double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; };
  const double a = h(2.0 - t), b = h(t - 1.0);
  return a / (a + b);
}

double SpectralBump::psi(double t) const { return eta(t) - eta(2.0 * t); }

double SpectralBump::psi_tilde(double t) const { return eta(0.5 * t) - eta(4.0 * t); }

double SpectralBump::psi_scaled(int j, double xi) const {
  return xi > 0 ? psi(std::ldexp(xi, -j)) : 0.0;
}

double SpectralBump::psi_tilde_scaled(int j, double xi) const {
  return xi > 0 ? psi_tilde(std::ldexp(xi, -j)) : 0.0;
}

GridFunction SpectralBump::kernel(int L, int Kp) const {
  const int M = 1 << (L + Kp);
  std::vector<Complex> coeffs(static_cast<std::size_t>(M) * M, Complex{0, 0});
  const double invT = std::ldexp(1.0, -L);
  for (int idx2 = 0; idx2 < M; ++idx2)
    for (int idx1 = 0; idx1 < M; ++idx1) {
      const double xi1 = freq_of_index(idx1, M) * invT;
      const double xi2 = freq_of_index(idx2, M) * invT;
      const double w = psi_tilde_scaled(0, xi1) * psi_tilde_scaled(0, xi2);
      if (w != 0.0) coeffs[static_cast<std::size_t>(idx2) * M + idx1] = w;
    }
  return GridFunction::from_spectrum(L, Kp, std::move(coeffs));
}

SpectralBump build_bumps() { return SpectralBump{}; }

const SpectralBump& default_bumps() {
  static const SpectralBump bumps{};
  return bumps;
}

std::pair<int, int> covered_scales(int L, int Kp) { return {-L - 1, Kp}; }

namespace {

// per-axis multiplier values on the frequency lattice
std::vector<double> axis_weights(const SpectralBump& bump, int scale, BumpKind kind,
                                 int L, int M) {
  std::vector<double> w(M, 0.0);
  const double invT = std::ldexp(1.0, -L);
  for (int idx = 0; idx < M; ++idx) {
    const double xi = freq_of_index(idx, M) * invT;
    w[idx] = kind == BumpKind::plain ? bump.psi_scaled(scale, xi)
                                     : bump.psi_tilde_scaled(scale, xi);
  }
  return w;
}

bool all_zero(const std::vector<double>& w) {
  for (double v : w)
    if (v != 0.0) return false;
  return true;
}

GridFunction apply_axis_multipliers(const GridFunction& f,
                                    const std::vector<double>* w1,
                                    const std::vector<double>* w2) {
  const int M = f.M();
  std::vector<Complex> F = f.samples();
  detail::dft2(F, M, M, -1);
  for (int idx2 = 0; idx2 < M; ++idx2) {
    const double b = w2 ? (*w2)[idx2] : 1.0;
    Complex* row = F.data() + static_cast<std::size_t>(idx2) * M;
    for (int idx1 = 0; idx1 < M; ++idx1) row[idx1] *= (w1 ? (*w1)[idx1] : 1.0) * b;
  }
  detail::dft2(F, M, M, +1);
  const double scale = 1.0 / (static_cast<double>(M) * M);
  for (auto& z : F) z *= scale;
  return GridFunction(f.L(), f.Kp(), std::move(F));
}

}  // namespace

GridFunction block_project(const GridFunction& f, BlockIndex b, BumpKind kind,
                           BlockAxis axis, const SpectralBump& bump) {
  const int M = f.M();
  std::vector<double> w1, w2;
  if (axis != BlockAxis::second) w1 = axis_weights(bump, b.i, kind, f.L(), M);
  if (axis != BlockAxis::first) w2 = axis_weights(bump, b.j, kind, f.L(), M);
  return apply_axis_multipliers(f, axis != BlockAxis::second ? &w1 : nullptr,
                                axis != BlockAxis::first ? &w2 : nullptr);
}

ReproduceResult reproduce(const GridFunction& f, const SpectralBump& bump) {
  const int M = f.M();
  const auto coeffs = f.spectrum();
  double maxabs = 0;
  for (const auto& z : coeffs) maxabs = std::max(maxabs, std::abs(z));
  if (maxabs > 0) {
    for (int idx2 = 0; idx2 < M; ++idx2)
      for (int idx1 = 0; idx1 < M; ++idx1) {
        const int k1 = freq_of_index(idx1, M), k2 = freq_of_index(idx2, M);
        if ((k1 <= 0 || k2 <= 0) &&
            std::abs(coeffs[static_cast<std::size_t>(idx2) * M + idx1]) >
                1e-12 * maxabs)
          throw std::invalid_argument("zero-frequency component uncovered");
      }
  }
  const auto [lo, hi] = covered_scales(f.L(), f.Kp());
  std::vector<std::vector<double>> pp(hi - lo + 1);  // psi~_s * psi_s per scale
  for (int s = lo; s <= hi; ++s) {
    auto plain = axis_weights(bump, s, BumpKind::plain, f.L(), M);
    const auto tilde = axis_weights(bump, s, BumpKind::tilde, f.L(), M);
    for (int idx = 0; idx < M; ++idx) plain[idx] *= tilde[idx];
    pp[s - lo] = std::move(plain);
  }
  // sum of Delta~_{i,j} Delta_{i,j} f accumulated as one spectral multiplier
  std::vector<double> mult(static_cast<std::size_t>(M) * M, 0.0);
  for (const auto& wi : pp) {
    if (all_zero(wi)) continue;
    for (const auto& wj : pp) {
      if (all_zero(wj)) continue;
      for (int idx2 = 0; idx2 < M; ++idx2) {
        if (wj[idx2] == 0.0) continue;
        double* row = mult.data() + static_cast<std::size_t>(idx2) * M;
        for (int idx1 = 0; idx1 < M; ++idx1) row[idx1] += wi[idx1] * wj[idx2];
      }
    }
  }
  std::vector<Complex> F = f.samples();
  detail::dft2(F, M, M, -1);
  for (std::size_t i = 0; i < F.size(); ++i) F[i] *= mult[i];
  detail::dft2(F, M, M, +1);
  const double scale = 1.0 / (static_cast<double>(M) * M);
  for (auto& z : F) z *= scale;
  ReproduceResult res{GridFunction(f.L(), f.Kp(), std::move(F)), 0.0};
  const double denom = f.l2();
  if (denom > 0) res.relative_error = (res.reconstruction - f).l2() / denom;
  return res;
}

std::vector<double> square_function_pow(const GridFunction& f, double p,
                                        const SpectralBump& bump) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  const int M = f.M();
  const auto [lo, hi] = covered_scales(f.L(), f.Kp());
  std::vector<std::vector<double>> weights(hi - lo + 1);
  std::vector<bool> live(hi - lo + 1, false);
  for (int s = lo; s <= hi; ++s) {
    weights[s - lo] = axis_weights(bump, s, BumpKind::plain, f.L(), M);
    live[s - lo] = !all_zero(weights[s - lo]);
  }
  std::vector<Complex> F = f.samples();
  detail::dft2(F, M, M, -1);
  const double scale = 1.0 / (static_cast<double>(M) * M);

  std::vector<double> acc(static_cast<std::size_t>(M) * M, 0.0);
  std::vector<Complex> work(static_cast<std::size_t>(M) * M);
  for (int i = lo; i <= hi; ++i) {
    if (!live[i - lo]) continue;
    for (int j = lo; j <= hi; ++j) {
      if (!live[j - lo]) continue;
      const auto& wi = weights[i - lo];
      const auto& wj = weights[j - lo];
      std::fill(work.begin(), work.end(), Complex{0, 0});
      bool any = false;
      for (int idx2 = 0; idx2 < M; ++idx2) {
        if (wj[idx2] == 0.0) continue;
        const Complex* src = F.data() + static_cast<std::size_t>(idx2) * M;
        Complex* dst = work.data() + static_cast<std::size_t>(idx2) * M;
        for (int idx1 = 0; idx1 < M; ++idx1)
          if (wi[idx1] != 0.0 && src[idx1] != Complex{0, 0}) {
            dst[idx1] = src[idx1] * (wi[idx1] * wj[idx2]);
            any = true;
          }
      }
      if (!any) continue;
      detail::dft2(work, M, M, +1);
      const double weight = std::ldexp(1.0, i + j);
      for (std::size_t n = 0; n < acc.size(); ++n) {
        const double mag2 = std::norm(work[n] * scale);
        if (mag2 > 0) acc[n] += weight * std::pow(mag2, 0.5 * p);
      }
    }
  }
  return acc;
}

GridFunction square_function(const GridFunction& f, double p,
                             const SpectralBump& bump) {
  const auto acc = square_function_pow(f, p, bump);
  GridFunction out(f.L(), f.Kp());
  for (std::size_t n = 0; n < acc.size(); ++n)
    out.samples()[n] = Complex{std::pow(acc[n], 1.0 / p), 0.0};
  return out;
}

double besov_norm(const GridFunction& f, double p, const SpectralBump& bump) {
  const auto acc = square_function_pow(f, p, bump);
  double total = 0;
  for (double v : acc) total += v;
  const double h = f.cell_size();
  return std::pow(total * h * h, 1.0 / p);
}

GridFunction analytic_project(const GridFunction& f) {
  const int M = f.M();
  std::vector<Complex> F = f.samples();
  detail::dft2(F, M, M, -1);
  for (int idx2 = 0; idx2 < M; ++idx2)
    for (int idx1 = 0; idx1 < M; ++idx1)
      if (freq_of_index(idx1, M) < 0 || freq_of_index(idx2, M) < 0)
        F[static_cast<std::size_t>(idx2) * M + idx1] = Complex{0, 0};
  detail::dft2(F, M, M, +1);
  const double scale = 1.0 / (static_cast<double>(M) * M);
  for (auto& z : F) z *= scale;
  return GridFunction(f.L(), f.Kp(), std::move(F));
}

GridFunction involution(const GridFunction& f) {
  const int M = f.M();
  GridFunction out(f.L(), f.Kp());
  for (int i2 = 0; i2 < M; ++i2)
    for (int i1 = 0; i1 < M; ++i1)
      out.at(i1, i2) = f.at((M - i1) % M, (M - i2) % M);
  return out;
}

namespace {

bool torus_in(double x, double lo, double width, double T) {
  if (width >= T) return true;
  double d = std::fmod(x - lo, T);
  if (d < 0) d += T;
  return d < width;
}

}  // namespace

double local_norm(const GridFunction& f, const std::vector<Rect>& region, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("q must be >= 1");
  const int M = f.M();
  const double h = f.cell_size(), T = f.period();
  std::vector<std::uint8_t> in1(M), in2(M);
  double acc = 0;
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(M) * M, 0);
  for (const auto& r : region) {
    for (int i = 0; i < M; ++i) {
      const double x = i * h;
      in1[i] = torus_in(x, r.x1lo, r.x1hi - r.x1lo, T) ? 1 : 0;
      in2[i] = torus_in(x, r.x2lo, r.x2hi - r.x2lo, T) ? 1 : 0;
    }
    for (int i2 = 0; i2 < M; ++i2) {
      if (!in2[i2]) continue;
      for (int i1 = 0; i1 < M; ++i1)
        if (in1[i1]) hit[static_cast<std::size_t>(i2) * M + i1] = 1;
    }
  }
  for (int i2 = 0; i2 < M; ++i2)
    for (int i1 = 0; i1 < M; ++i1)
      if (hit[static_cast<std::size_t>(i2) * M + i1])
        acc += std::pow(std::norm(f.at(i1, i2)), 0.5 * q);
  return std::pow(acc * h * h, 1.0 / q);
}

std::vector<std::pair<int, int>> annulus_index_ranges(const dyadic::DyadicInterval& I,
                                                      int u, double period, int M) {
  if (u != 0 && u < 4) throw std::invalid_argument("excluded annulus index");
  const double h = period / M;
  const double c = I.center();
  double hw_out = u == 0 ? 4.0 * I.length() : std::ldexp(I.length(), u - 1);
  double hw_in = u == 0 ? 0.0 : std::ldexp(I.length(), u - 2);
  hw_out = std::min(hw_out, period / 2);
  hw_in = std::min(hw_in, period / 2);
  std::vector<std::pair<int, int>> ranges;
  if (hw_in >= period / 2) return ranges;  // annulus empty on the torus
  int start = -1;
  for (int i = 0; i < M; ++i) {
    const double x = i * h;
    const bool inside = torus_in(x, c - hw_out, 2 * hw_out, period) &&
                        !(hw_in > 0 && torus_in(x, c - hw_in, 2 * hw_in, period));
    if (inside && start < 0) start = i;
    if (!inside && start >= 0) {
      ranges.emplace_back(start, i);
      start = -1;
    }
  }
  if (start >= 0) ranges.emplace_back(start, M);
  return ranges;
}

std::vector<Rect> annulus_region(const dyadic::DyadicRectangle& R, int u, int v,
                                 double period) {
  auto pieces = [&](const dyadic::DyadicInterval& I, int w) {
    if (w != 0 && w < 4) throw std::invalid_argument("excluded annulus index");
    const double c = I.center();
    double hw_out = w == 0 ? 4.0 * I.length() : std::ldexp(I.length(), w - 1);
    double hw_in = w == 0 ? 0.0 : std::ldexp(I.length(), w - 2);
    hw_out = std::min(hw_out, period / 2);
    hw_in = std::min(hw_in, period / 2);
    std::vector<std::pair<double, double>> out;
    if (hw_in >= period / 2) return out;
    if (hw_in == 0.0) {
      out.emplace_back(c - hw_out, c + hw_out);
    } else {
      out.emplace_back(c - hw_out, c - hw_in);
      out.emplace_back(c + hw_in, c + hw_out);
    }
    return out;
  };
  std::vector<Rect> region;
  for (const auto& [alo, ahi] : pieces(R.first, u))
    for (const auto& [blo, bhi] : pieces(R.second, v))
      region.push_back({alo, ahi, blo, bhi});
  return region;
}

int annulus_cap(const dyadic::DyadicInterval& I, double period) {
  if (8.0 * I.length() >= period) return 0;
  int u = 4;
  while (std::ldexp(I.length(), u - 1) < period / 2) ++u;
  return u;
}

RegionIntegrator::RegionIntegrator(const std::vector<double>& cell_values, int M)
    : M_(M), prefix_(static_cast<std::size_t>(M + 1) * (M + 1), 0.0) {
  if (cell_values.size() != static_cast<std::size_t>(M) * M)
    throw std::invalid_argument("RegionIntegrator: size mismatch");
  for (int r = 0; r < M; ++r)
    for (int c = 0; c < M; ++c)
      prefix_[static_cast<std::size_t>(r + 1) * (M + 1) + (c + 1)] =
          prefix_[static_cast<std::size_t>(r) * (M + 1) + (c + 1)] +
          prefix_[static_cast<std::size_t>(r + 1) * (M + 1) + c] -
          prefix_[static_cast<std::size_t>(r) * (M + 1) + c] +
          cell_values[static_cast<std::size_t>(r) * M + c];
}

double RegionIntegrator::sum(const std::vector<std::pair<int, int>>& col_ranges,
                             const std::vector<std::pair<int, int>>& row_ranges) const {
  auto box = [&](int r0, int r1, int c0, int c1) {
    const int W = M_ + 1;
    return prefix_[static_cast<std::size_t>(r1) * W + c1] -
           prefix_[static_cast<std::size_t>(r0) * W + c1] -
           prefix_[static_cast<std::size_t>(r1) * W + c0] +
           prefix_[static_cast<std::size_t>(r0) * W + c0];
  };
  double acc = 0;
  for (const auto& [r0, r1] : row_ranges)
    for (const auto& [c0, c1] : col_ranges) acc += box(r0, r1, c0, c1);
  return acc;
}

DecayProfile decay_profile(int i, const dyadic::DyadicInterval& I, int u, double M) {
  if (u != 0 && u < 4) throw std::invalid_argument("excluded annulus index");
  if (!(M >= 1.0)) throw std::invalid_argument("M must be >= 1");
  const double x = std::ldexp(1.0, i + I.n);  // 2^i |I|
  DecayProfile p;
  p.m = std::min(1.0, x);
  p.theta = u == 0 ? 1.0 : std::pow(1.0 + std::ldexp(x, u), -M);
  return p;
}

bool piece_supported_in_3r(const GridFunction& a, const dyadic::DyadicRectangle& R) {
  const int M = a.M();
  const double h = a.cell_size(), T = a.period();
  auto allowed = [&](const dyadic::DyadicInterval& I) {
    const double lo = std::max(0.0, I.center() - 1.5 * I.length());
    const double hi = std::min(T, I.center() + 1.5 * I.length());
    const int i0 = static_cast<int>(std::ceil(lo / h));
    const int i1 = static_cast<int>(std::ceil(hi / h));
    return std::pair<int, int>{i0, i1};
  };
  const auto [c0, c1] = allowed(R.first);
  const auto [r0, r1] = allowed(R.second);
  for (int i2 = 0; i2 < M; ++i2)
    for (int i1 = 0; i1 < M; ++i1) {
      if (i1 >= c0 && i1 < c1 && i2 >= r0 && i2 < r1) continue;
      if (a.at(i1, i2) != Complex{0, 0}) return false;
    }
  return true;
}

double cancellation_residual(const GridFunction& a) {
  const int M = a.M();
  const double h = a.cell_size();
  double l1 = 0;
  for (const auto& z : a.samples()) l1 += std::abs(z);
  l1 *= h * h;
  if (l1 == 0) return 0;
  double worst = 0;
  for (int i2 = 0; i2 < M; ++i2) {
    Complex row{0, 0};
    for (int i1 = 0; i1 < M; ++i1) row += a.at(i1, i2);
    worst = std::max(worst, std::abs(row) * h);
  }
  for (int i1 = 0; i1 < M; ++i1) {
    Complex col{0, 0};
    for (int i2 = 0; i2 < M; ++i2) col += a.at(i1, i2);
    worst = std::max(worst, std::abs(col) * h);
  }
  return worst / l1;
}

double annular_decay_check(const GridFunction& piece, const dyadic::DyadicRectangle& R,
                           BlockIndex b, int u, int v, double q, double decay_m,
                           const SpectralBump& bump) {
  if (!(q >= 1.0)) throw std::invalid_argument("q must be >= 1");
  if (!piece_supported_in_3r(piece, R) || cancellation_residual(piece) > 1e-12)
    throw std::invalid_argument("invalid piece");
  const double norm_q = piece.lq(q);
  if (norm_q == 0) return 0.0;
  // the adjoint of the tilde block is the same multiplier (real bumps)
  const GridFunction proj = block_project(piece, b, BumpKind::tilde,
                                          BlockAxis::both, bump);
  const int M = piece.M();
  std::vector<double> field(static_cast<std::size_t>(M) * M);
  for (std::size_t n = 0; n < field.size(); ++n)
    field[n] = std::pow(std::norm(proj.samples()[n]), 0.5 * q);
  const RegionIntegrator integ(field, M);
  const auto cols = annulus_index_ranges(R.first, u, piece.period(), M);
  const auto rows = annulus_index_ranges(R.second, v, piece.period(), M);
  const double h = piece.cell_size();
  const double lhs = std::pow(integ.sum(cols, rows) * h * h, 1.0 / q);
  const auto pi = decay_profile(b.i, R.first, u, decay_m);
  const auto pj = decay_profile(b.j, R.second, v, decay_m);
  const double rhs = pi.m * pj.m * pi.theta * pj.theta * norm_q;
  return lhs / rhs;
}

BlockSweep::BlockSweep(const GridFunction& f, const SpectralBump& bump)
    : bump_(bump), L_(f.L()), Kp_(f.Kp()), M_(f.M()), forward_(f.samples()) {
  detail::dft2(forward_, M_, M_, -1);
}

const std::vector<double>& BlockSweep::weights(int scale, BumpKind kind) const {
  auto& cache = weight_cache_[kind == BumpKind::plain ? 0 : 1];
  const int slot = scale + 64;
  if (slot < 0 || slot >= 128) throw std::invalid_argument("block scale out of range");
  if (cache.empty()) cache.resize(128);
  if (cache[slot].empty()) cache[slot] = axis_weights(bump_, scale, kind, L_, M_);
  return cache[slot];
}

GridFunction BlockSweep::project(BlockIndex b, BumpKind kind) const {
  const auto& w1 = weights(b.i, kind);
  const auto& w2 = weights(b.j, kind);
  std::vector<Complex> F(forward_.size());
  for (int idx2 = 0; idx2 < M_; ++idx2) {
    const double wb = w2[idx2];
    const Complex* src = forward_.data() + static_cast<std::size_t>(idx2) * M_;
    Complex* dst = F.data() + static_cast<std::size_t>(idx2) * M_;
    if (wb == 0.0) {
      std::fill(dst, dst + M_, Complex{0, 0});
      continue;
    }
    for (int idx1 = 0; idx1 < M_; ++idx1) dst[idx1] = src[idx1] * (w1[idx1] * wb);
  }
  detail::dft2(F, M_, M_, +1);
  const double scale = 1.0 / (static_cast<double>(M_) * M_);
  for (auto& z : F) z *= scale;
  return GridFunction(L_, Kp_, std::move(F));
}

double a_u(const dyadic::DyadicInterval& I, int u, double p, double decay_m) {
  if (!(p > 1.0)) throw std::invalid_argument("p must be > 1");
  if (u != 0 && u < 4) throw std::invalid_argument("excluded annulus index");
  if (!(decay_m >= 1.0)) throw std::invalid_argument("M must be >= 1");
  const double q = p / (p - 1.0);
  auto term = [&](int i) {
    const double x = std::ldexp(1.0, i + I.n);
    const double m = std::min(1.0, x);
    const double theta = u == 0 ? 1.0 : std::pow(1.0 + std::ldexp(x, u), -decay_m);
    const double base = std::pow(2.0, -static_cast<double>(i) / p) * m * theta;
    return std::pow(base, q);
  };
  // the summand peaks between 2^i|I| = 2^-u (theta knee) and 2^i|I| = 1
  // (m knee); sweep that span plus geometric tails cut below 1e-18
  const int knee_hi = -I.n;
  const int knee_lo = -u - I.n;
  double sum = 0;
  for (int i = knee_lo; i <= knee_hi; ++i) sum += term(i);
  for (int i = knee_hi + 1; i <= knee_hi + 600; ++i) {
    const double t = term(i);
    sum += t;
    if (t < 1e-18) break;
  }
  for (int i = knee_lo - 1; i >= knee_lo - 600; --i) {
    const double t = term(i);
    sum += t;
    if (t < 1e-18) break;
  }
  return std::pow(sum, 1.0 / q);
}

}  // namespace lab::spectral
