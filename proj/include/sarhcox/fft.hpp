#pragma once

// Thin RAII wrapper over FFTW for batched 2-D complex transforms.

#include <complex>
#include <memory>
#include <mutex>
#include <span>

#include <fftw3.h>

#include "errors.hpp"

namespace sarhcox::fft {

enum class Direction { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

namespace detail {
// The FFTW planner is not reentrant; execution of an existing plan is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
}  // namespace detail

/// In-place unnormalized transform of `howmany` interleaved n1 x n2 planes.
/// Element (a, b) of plane k lives at buffer[(a * n2 + b) * howmany + k].
/// forward:  Y(u) = sum_y exp(-2 pi i <u, y / n>) X(y); backward uses +i.
inline void transform_2d(std::span<std::complex<double>> buffer, int n1, int n2, int howmany,
                         Direction dir) {
  if (n1 < 1 || n2 < 1 || howmany < 1 ||
      buffer.size() != static_cast<std::size_t>(n1) * n2 * howmany)
    throw DomainError("fft buffer extent does not match n1 x n2 x howmany");
  auto* data = reinterpret_cast<fftw_complex*>(buffer.data());
  const int n[2] = {n1, n2};
  std::unique_ptr<fftw_plan_s, detail::PlanDeleter> plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan.reset(fftw_plan_many_dft(2, n, howmany, data, nullptr, howmany, 1, data, nullptr,
                                  howmany, 1, static_cast<int>(dir), FFTW_ESTIMATE));
  }
  if (!plan) throw Error("FFTW failed to create a plan");
  fftw_execute_dft(plan.get(), data, data);
}

}  // namespace sarhcox::fft
