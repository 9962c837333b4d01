#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace xlhpe {

/// Environment variable read by configure_workers_from_env().
inline constexpr const char* kWorkersEnv = "XLHPE_WORKERS";

/// Applies XLHPE_WORKERS (if set and positive) to the OpenMP runtime and
/// returns the resulting worker count.
int configure_workers_from_env();
int worker_count();
void set_worker_count(int n);

/// Runs body(i) for i in [0, n) across OpenMP threads. The first exception
/// thrown by any iteration is rethrown on the calling thread after the loop.
/// Iterations must write to disjoint outputs; results are then independent of
/// the thread count.
void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& body,
                  bool dynamic_schedule = false);

}  // namespace xlhpe
