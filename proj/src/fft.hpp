#pragma once

// Thin RAII wrapper around FFTW plans. Plans are created once per size under a
// lock (the FFTW planner is not thread-safe) and executed with the new-array
// interface, which is safe to call concurrently.

#include <fftw3.h>

#include <complex>
#include <mutex>

namespace qbm::detail {

class FftPlan {
 public:
  enum class Direction { forward, backward };

  FftPlan(int n, Direction dir) : n_(n) {
    static std::mutex planner_mutex;
    std::lock_guard lock(planner_mutex);
    auto* scratch = fftw_alloc_complex(static_cast<std::size_t>(n));
    plan_ = fftw_plan_dft_1d(n, scratch, scratch, dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    if (plan_ != nullptr) fftw_destroy_plan(plan_);
  }

  int size() const { return n_; }

  /// In-place unnormalized transform of n contiguous values.
  void execute(std::complex<double>* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan_, p, p);
  }

 private:
  int n_;
  fftw_plan plan_ = nullptr;
};

}  // namespace qbm::detail
