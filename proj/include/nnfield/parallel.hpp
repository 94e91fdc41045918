// Thread-count control for the OpenMP kernels.
#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nnf {

/// Caps the number of threads used by all parallel kernels. n <= 0 restores
/// the runtime default. Results never depend on this setting.
void set_max_threads(int n);

int max_threads();

} // namespace nnf
