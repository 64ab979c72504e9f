#pragma once

// Finite sections of small Hankel operators on the nonnegative frequency
// lattice: the matrix phi^(xi+lambda) over xi, lambda in {0..N-1}^2, Schatten
// norms from the singular values, the fast apply path, and the bridge to the
// grid Besov norm of the symbol.

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

namespace lab::hankel {

using Complex = std::complex<double>;

struct AnalyticSymbol {
  int N = 0;
  // Fourier coefficients on {0,...,2N-2}^2, row-major (kappa1 major)
  std::vector<Complex> coeffs;
  bool zero_axis_excluded = false;

  explicit AnalyticSymbol(int N = 2, bool zero_axis = false);
  int extent() const { return 2 * N - 1; }
  Complex at(int k1, int k2) const {
    return coeffs[static_cast<std::size_t>(k1) * extent() + k2];
  }
  void set(int k1, int k2, Complex v);
  bool is_zero() const;
};

// N^2 x N^2 section, bi-indices flattened row-major (xi1*N + xi2); singular
// values are computed once on demand and cached.
class HankelMatrix {
 public:
  explicit HankelMatrix(const AnalyticSymbol& phi);

  int N() const { return N_; }
  const Eigen::MatrixXcd& matrix() const { return A_; }
  const std::vector<double>& singular_values() const;

 private:
  int N_;
  Eigen::MatrixXcd A_;
  struct Cache {
    std::mutex mu;
    bool done = false;
    std::vector<double> sv;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

HankelMatrix hankel_matrix(const AnalyticSymbol& phi);

// (sum sigma_k^p)^{1/p}, p in [1, inf)
double schatten_norm(const HankelMatrix& H, double p);

// S^2 norm from the combinatorial weight identity
// sum_kappa w(kappa) |phi^(kappa)|^2, the independent Frobenius route.
double frobenius_norm(const AnalyticSymbol& phi);

// g^(xi) = sum_lambda phi^(xi+lambda) f^(lambda): dense matrix route and the
// zero-padded FFT convolution route; the two must agree.
std::vector<Complex> operator_apply(const HankelMatrix& H,
                                    const std::vector<Complex>& fhat);
std::vector<Complex> operator_apply_fft(const AnalyticSymbol& phi,
                                        const std::vector<Complex>& fhat);

// Embeds the coefficients on the grid frequency lattice (kappa -> k = kappa
// 2^L) and evaluates the grid Besov norm.
double besov_lattice_norm(const AnalyticSymbol& phi, double p, int L, int Kp);

double equivalence_ratio(const AnalyticSymbol& phi, double p, int L, int Kp);

}  // namespace lab::hankel
