#include "lab/hankel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

#include "lab/fft.hpp"
#include "lab/spectral.hpp"

namespace lab::hankel {

AnalyticSymbol::AnalyticSymbol(int N, bool zero_axis)
    : N(N), zero_axis_excluded(zero_axis) {
  if (N < 1 || N > 64) throw std::invalid_argument("symbol size out of range");
  coeffs.assign(static_cast<std::size_t>(extent()) * extent(), Complex{0, 0});
}

void AnalyticSymbol::set(int k1, int k2, Complex v) {
  if (k1 < 0 || k1 >= extent() || k2 < 0 || k2 >= extent())
    throw std::invalid_argument("coefficient index out of range");
  if (zero_axis_excluded && (k1 == 0 || k2 == 0) && v != Complex{0, 0})
    throw std::invalid_argument("axis coefficient must stay zero");
  coeffs[static_cast<std::size_t>(k1) * extent() + k2] = v;
}

bool AnalyticSymbol::is_zero() const {
  for (const auto& c : coeffs)
    if (c != Complex{0, 0}) return false;
  return true;
}

HankelMatrix::HankelMatrix(const AnalyticSymbol& phi) : N_(phi.N) {
  const long dim = static_cast<long>(N_) * N_;
  A_.resize(dim, dim);
  for (int x1 = 0; x1 < N_; ++x1)
    for (int x2 = 0; x2 < N_; ++x2)
      for (int l1 = 0; l1 < N_; ++l1)
        for (int l2 = 0; l2 < N_; ++l2)
          A_(x1 * N_ + x2, l1 * N_ + l2) = phi.at(x1 + l1, x2 + l2);
}

const std::vector<double>& HankelMatrix::singular_values() const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->done) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A_);
    cache_->sv.assign(svd.singularValues().data(),
                      svd.singularValues().data() + svd.singularValues().size());
    cache_->done = true;
  }
  return cache_->sv;
}

HankelMatrix hankel_matrix(const AnalyticSymbol& phi) { return HankelMatrix(phi); }

double schatten_norm(const HankelMatrix& H, double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw std::invalid_argument("p must be finite and >= 1");
  double acc = 0;
  for (double s : H.singular_values()) acc += std::pow(s, p);
  return std::pow(acc, 1.0 / p);
}

double frobenius_norm(const AnalyticSymbol& phi) {
  const int N = phi.N;
  double acc = 0;
  for (int k1 = 0; k1 < phi.extent(); ++k1) {
    const double w1 = std::min(k1, N - 1) - std::max(0, k1 - N + 1) + 1;
    for (int k2 = 0; k2 < phi.extent(); ++k2) {
      const double w2 = std::min(k2, N - 1) - std::max(0, k2 - N + 1) + 1;
      acc += w1 * w2 * std::norm(phi.at(k1, k2));
    }
  }
  return std::sqrt(acc);
}

std::vector<Complex> operator_apply(const HankelMatrix& H,
                                    const std::vector<Complex>& fhat) {
  const long dim = static_cast<long>(H.N()) * H.N();
  if (static_cast<long>(fhat.size()) != dim)
    throw std::invalid_argument("coefficient shape mismatch");
  Eigen::Map<const Eigen::VectorXcd> f(fhat.data(), dim);
  Eigen::VectorXcd g = H.matrix() * f;
  return std::vector<Complex>(g.data(), g.data() + dim);
}

std::vector<Complex> operator_apply_fft(const AnalyticSymbol& phi,
                                        const std::vector<Complex>& fhat) {
  const int N = phi.N;
  if (static_cast<long>(fhat.size()) != static_cast<long>(N) * N)
    throw std::invalid_argument("coefficient shape mismatch");
  int P = 1;
  while (P < 3 * N - 2) P <<= 1;
  std::vector<Complex> a(static_cast<std::size_t>(P) * P, Complex{0, 0});
  std::vector<Complex> b(static_cast<std::size_t>(P) * P, Complex{0, 0});
  for (int k1 = 0; k1 < phi.extent(); ++k1)
    for (int k2 = 0; k2 < phi.extent(); ++k2)
      a[static_cast<std::size_t>(k1) * P + k2] = phi.at(k1, k2);
  // involuted input: f~(j) = f^(N-1-j)
  for (int j1 = 0; j1 < N; ++j1)
    for (int j2 = 0; j2 < N; ++j2)
      b[static_cast<std::size_t>(j1) * P + j2] =
          fhat[static_cast<std::size_t>(N - 1 - j1) * N + (N - 1 - j2)];
  detail::dft2(a, P, P, -1);
  detail::dft2(b, P, P, -1);
  for (std::size_t n = 0; n < a.size(); ++n) a[n] *= b[n];
  detail::dft2(a, P, P, +1);
  const double scale = 1.0 / (static_cast<double>(P) * P);
  std::vector<Complex> out(static_cast<std::size_t>(N) * N);
  for (int x1 = 0; x1 < N; ++x1)
    for (int x2 = 0; x2 < N; ++x2)
      out[static_cast<std::size_t>(x1) * N + x2] =
          a[static_cast<std::size_t>(x1 + N - 1) * P + (x2 + N - 1)] * scale;
  return out;
}

double besov_lattice_norm(const AnalyticSymbol& phi, double p, int L, int Kp) {
  if (!phi.zero_axis_excluded)
    throw std::invalid_argument("zero-axis coefficients must be excluded");
  const int M = 1 << (L + Kp);
  const long kmax = static_cast<long>(phi.extent() - 1) << L;
  if (kmax > M / 2 - 1) throw std::invalid_argument("frequency range overflow");
  std::vector<Complex> coeffs(static_cast<std::size_t>(M) * M, Complex{0, 0});
  for (int k1 = 1; k1 < phi.extent(); ++k1)
    for (int k2 = 1; k2 < phi.extent(); ++k2)
      coeffs[static_cast<std::size_t>(spectral::index_of_freq(k2 << L, M)) * M +
             spectral::index_of_freq(k1 << L, M)] = phi.at(k1, k2);
  const auto f = spectral::GridFunction::from_spectrum(L, Kp, std::move(coeffs));
  return spectral::besov_norm(f, p);
}

double equivalence_ratio(const AnalyticSymbol& phi, double p, int L, int Kp) {
  if (phi.is_zero()) throw std::invalid_argument("ratio undefined");
  return schatten_norm(hankel_matrix(phi), p) / besov_lattice_norm(phi, p, L, Kp);
}

}  // namespace lab::hankel
