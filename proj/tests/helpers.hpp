#ifndef UNADV_TESTS_HELPERS_HPP
#define UNADV_TESTS_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <functional>

#include "unadv/rng.hpp"
#include "unadv/tensor.hpp"

namespace testutil {

using unadv::Rng;
using unadv::Tensor;
using unadv::real;

inline Tensor random_tensor(std::vector<int> shape, Rng& rng, real lo = -1.0, real hi = 1.0) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Central finite differences of a scalar function of one tensor. `loss_of`
// must be pure: it rebuilds whatever graph it needs from the given tensor.
inline Tensor fd_gradient(const Tensor& x0, const std::function<real(const Tensor&)>& loss_of,
                          real eps = 1e-4) {
    Tensor g(x0.shape());
    Tensor x = x0;
    for (int64_t i = 0; i < x.size(); ++i) {
        const real keep = x[i];
        x[i] = keep + eps;
        const real up = loss_of(x);
        x[i] = keep - eps;
        const real dn = loss_of(x);
        x[i] = keep;
        g[i] = (up - dn) / (2 * eps);
    }
    return g;
}

// Largest per-coordinate relative error, with a small absolute floor so
// near-zero entries compare on absolute terms.
inline real max_rel_err(const Tensor& a, const Tensor& b) {
    real worst = 0.0;
    for (int64_t i = 0; i < a.size(); ++i) {
        const real denom = std::max({std::abs(a[i]), std::abs(b[i]), real(1e-6)});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

inline bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (int64_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

} // namespace testutil

#endif
