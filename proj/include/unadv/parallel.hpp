#ifndef UNADV_PARALLEL_HPP
#define UNADV_PARALLEL_HPP

#include <cstdint>

namespace unadv::parallel {

// Process-wide switch between the OpenMP kernels and the serial reference
// path. Every parallel loop in the project is gather-style (one writer per
// output element), so the two paths produce bit-identical results.
bool enabled();
void set_enabled(bool on);

// Requested thread count; 0 means the OpenMP runtime default.
int threads();
void set_threads(int n);

// Static-schedule parallel for over [0, n). Falls back to a plain loop when
// the switch is off or the build has no OpenMP.
template <typename Fn>
void parallel_for(int64_t n, Fn&& fn);

namespace detail {
void run_omp(int64_t n, void (*trampoline)(void*, int64_t), void* ctx);
}

template <typename Fn>
void parallel_for(int64_t n, Fn&& fn) {
    if (!enabled() || n < 2) {
        for (int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    auto trampoline = [](void* ctx, int64_t i) { (*static_cast<Fn*>(ctx))(i); };
    detail::run_omp(n, trampoline, &fn);
}

} // namespace unadv::parallel

#endif
