#pragma once

#include <cstdint>

namespace qread {

/// Execution policy for the heavy count-grid kernels. Serial is the reference
/// implementation; Parallel is the OpenMP version. Auto picks Parallel once
/// the work estimate is large enough to amortize thread startup.
enum class Exec { Serial, Parallel, Auto };

namespace kernels {

inline constexpr std::int64_t kParallelWorkThreshold = 1 << 16;

/// Resolves Auto against a work estimate (number of inner-loop cells).
bool use_parallel(Exec exec, std::int64_t work_estimate);

/// Sets the OpenMP thread count used by Parallel kernels (0 = library default).
void set_jobs(int jobs);

}  // namespace kernels
}  // namespace qread
