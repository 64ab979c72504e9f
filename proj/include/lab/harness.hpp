#pragma once

// Randomized corpora, the experiment suites binding all modules, and report
// emission. Every quantity is a pure function of (config, seed); report rows
// are ordered by trial index regardless of thread scheduling.

#include <cstdint>
#include <string>
#include <vector>

#include "lab/dyadic.hpp"
#include "lab/hankel.hpp"
#include "lab/spectral.hpp"

namespace lab::harness {

enum class SetFamily { rectangles, staircase };

struct GeometryParams {
  int L = 2;
  int K = 3;
  int min_rects = 0;
  int max_rects = 8;
  int margin_cells = 0;
};

// Union of seeded dyadic rectangles, or a seeded descending staircase,
// clipped to the window interior margin.
dyadic::GridOpenSet random_open_set(std::uint64_t seed, const GeometryParams& params,
                                    SetFamily family = SetFamily::rectangles);

// Seeded complex Gaussian coefficients with the power-law envelope
// (1 + |kappa|^2)^{-alpha/2}.
hankel::AnalyticSymbol random_symbol(std::uint64_t seed, int N, double alpha,
                                     bool zero_axis = true);

// Seeded analytic band-limited function: Gaussian spectrum on [1,kmax]^2 with
// the same power-law envelope.
spectral::GridFunction random_analytic_function(std::uint64_t seed, int L, int Kp,
                                                int kmax, double alpha);

struct ExperimentConfig {
  std::string suite;
  std::uint64_t seed = 1;
  int trials = 100;
  int threads = 0;  // 0 = hardware concurrency
  GeometryParams geometry;
  int Kp = 5;                                 // spectral resolution exponent
  std::vector<double> m_sweep{2.0, 4.0};      // decay-lemma M values
  std::vector<double> p_list{3.0, 4.0};       // pairing/equivalence exponents
  double p = 3.0;                             // primary exponent
  double delta = 0.25;                        // atom normalization weight
  std::vector<double> delta_list{0.25, 0.5, 1.0};
  std::vector<double> beta_list{0.25, 0.5, 0.75};
  std::vector<int> uv_list{0, 4, 5, 6};
  int x_samples = 20;
  std::vector<int> n_list{8, 16, 32};  // section sizes (besov-schatten)
  std::string out = "report";

  double q() const { return p / (p - 1.0); }
  double beta() const { return delta * (p - 1.0); }
  void validate() const;
};

ExperimentConfig default_config(const std::string& suite);
// Defaults for the named suite overridden by the keys present in the JSON;
// rejects configs violating q = p/(p-1) or beta = delta(p-1) < 1.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

struct SuiteReport {
  std::string suite;
  std::string csv;           // deterministic body
  std::string summary_json;  // aggregates; generated_at carried separately
  std::string generated_at;
  int failures = 0;
  double max_ratio = 0;
};

SuiteReport run_suite(const ExperimentConfig& config);

// Writes <out>.csv and <out>.json (summary with the generated_at header field).
void write_report(const SuiteReport& report, const std::string& out_base);

std::string format_double(double v);

}  // namespace lab::harness
