#ifndef UNADV_OPTIM_HPP
#define UNADV_OPTIM_HPP

#include <vector>

#include "unadv/tensor.hpp"

namespace unadv::optim {

struct SgdConfig {
    real learning_rate = 0.1;
    real momentum = 0.9;
    real weight_decay = 1e-4;
};

// Heavy-ball SGD on one tensor: v <- mu*v + g + lambda*w; w <- w - eta*v.
// `velocity` must have w's shape (zero-initialized on first use). Throws on
// non-finite gradients, naming the offending index.
void sgd_update(Tensor& w, const Tensor& g, Tensor& velocity, const SgdConfig& cfg);

// Per-coordinate w <- clamp01(w - step * sign(g)); coordinates with exactly
// zero gradient stay put. step must be positive.
void sign_update(Tensor& w, const Tensor& g, real step);

// Convenience wrapper holding one velocity buffer per parameter tensor.
class Sgd {
public:
    explicit Sgd(SgdConfig cfg) : cfg_(cfg) {}

    const SgdConfig& config() const { return cfg_; }

    // Applies one update to each (param, grad) pair. The param list must be
    // the same, in the same order, on every call.
    void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads);

private:
    SgdConfig cfg_;
    std::vector<Tensor> velocity_;
};

} // namespace unadv::optim

#endif
