#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sdwnet {

// Caps the worker count used by the compute kernels. Every kernel assigns
// each output element to exactly one worker and reduces over its inputs in a
// fixed order, so results are bitwise identical for any thread count.
inline void set_num_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace sdwnet
