#include "unadv/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace unadv::parallel {

namespace {
bool g_enabled = true;
int g_threads = 0;
} // namespace

bool enabled() {
#ifdef _OPENMP
    return g_enabled;
#else
    return false;
#endif
}

void set_enabled(bool on) { g_enabled = on; }

int threads() { return g_threads; }

void set_threads(int n) {
    g_threads = n;
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#endif
}

namespace detail {

void run_omp(int64_t n, void (*trampoline)(void*, int64_t), void* ctx) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) trampoline(ctx, i);
#else
    for (int64_t i = 0; i < n; ++i) trampoline(ctx, i);
#endif
}

} // namespace detail

} // namespace unadv::parallel
