#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pdt {

// Thread count used by the OpenMP kernels.  0 keeps the runtime default.
inline void set_threads(int n) {
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

}  // namespace pdt
