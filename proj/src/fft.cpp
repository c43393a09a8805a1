#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace kamtorus::detail {
namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

fftw_plan plan_for(std::span<const int> dims, int sign) {
  auto& c = cache();
  std::lock_guard lock(c.mutex);
  auto key = std::make_pair(std::vector<int>(dims.begin(), dims.end()), sign);
  if (auto it = c.plans.find(key); it != c.plans.end()) return it->second;

  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  auto* scratch = fftw_alloc_complex(total);
  fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), scratch, scratch,
                                 sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
  if (plan == nullptr) throw std::runtime_error("fftw planning failed");
  c.plans.emplace(std::move(key), plan);
  return plan;
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& data, std::span<const int> dims,
                 FftDirection direction) {
  if (data.empty()) return;
  const int sign = direction == FftDirection::kForward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = plan_for(dims, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace kamtorus::detail
