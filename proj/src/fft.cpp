#include "lab/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace lab::detail {

namespace {
// FFTW plan creation/destruction is not thread safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

void dft2(std::vector<std::complex<double>>& data, int rows, int cols, int sign) {
  if (rows <= 0 || cols <= 0 || static_cast<std::size_t>(rows) * cols != data.size())
    throw std::invalid_argument("dft2: dimension mismatch");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_2d(rows, cols, ptr, ptr,
                            sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("dft2: fftw plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
}

}  // namespace lab::detail
