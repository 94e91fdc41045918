#include "nnfield/parallel.hpp"

namespace nnf {

void set_max_threads(int n) {
#ifdef _OPENMP
    if (n <= 0) {
        omp_set_num_threads(omp_get_num_procs());
    } else {
        omp_set_num_threads(n);
    }
#else
    (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace nnf
