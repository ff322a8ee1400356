#pragma once
#include <cstdint>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rfou {

// Execution policy for the data-parallel kernels. Every kernel computes each
// output element with a fixed serial summation order, so serial and openmp
// runs produce bit-identical results; the serial path is the reference the
// tests compare against.
enum class exec { serial, openmp };

template <class Body>
void for_each_index(exec policy, std::int64_t n, Body&& body) {
#ifdef _OPENMP
    if (policy == exec::openmp) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
#else
    (void)policy;
#endif
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

// Dynamic schedule variant for triangular workloads (e.g. kernel table columns).
template <class Body>
void for_each_index_dynamic(exec policy, std::int64_t n, Body&& body) {
#ifdef _OPENMP
    if (policy == exec::openmp) {
#pragma omp parallel for schedule(dynamic, 8)
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
#else
    (void)policy;
#endif
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

} // namespace rfou
