#include "xlhpe/parallel.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

#include <omp.h>

namespace xlhpe {

int configure_workers_from_env() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const int n = std::stoi(env);
      if (n > 0) omp_set_num_threads(n);
    } catch (const std::exception&) {
      // unparseable values leave the OpenMP default in place
    }
  }
  return omp_get_max_threads();
}

int worker_count() { return omp_get_max_threads(); }

void set_worker_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& body,
                  bool dynamic_schedule) {
  std::exception_ptr error;
  std::mutex error_mutex;
  auto guarded = [&](std::ptrdiff_t i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  if (dynamic_schedule) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) guarded(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) guarded(i);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace xlhpe
