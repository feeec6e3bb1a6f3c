#include "unadv/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace unadv::optim {

static void require_finite(const Tensor& g, const char* where) {
    for (int64_t i = 0; i < g.size(); ++i)
        if (!std::isfinite(g[i]))
            throw std::runtime_error(std::string(where) + ": non-finite gradient at index " +
                                     std::to_string(i));
}

void sgd_update(Tensor& w, const Tensor& g, Tensor& velocity, const SgdConfig& cfg) {
    require_same_shape(w, g, "sgd_update");
    require_same_shape(w, velocity, "sgd_update velocity");
    require_finite(g, "sgd_update");
    const real mu = cfg.momentum, eta = cfg.learning_rate, lambda = cfg.weight_decay;
    for (int64_t i = 0; i < w.size(); ++i) {
        velocity[i] = mu * velocity[i] + g[i] + lambda * w[i];
        w[i] -= eta * velocity[i];
    }
}

void sign_update(Tensor& w, const Tensor& g, real step) {
    if (!(step > 0)) throw std::invalid_argument("sign_update: step must be positive");
    require_same_shape(w, g, "sign_update");
    require_finite(g, "sign_update");
    for (int64_t i = 0; i < w.size(); ++i) {
        if (g[i] > 0)
            w[i] -= step;
        else if (g[i] < 0)
            w[i] += step;
        if (w[i] < 0) w[i] = 0;
        if (w[i] > 1) w[i] = 1;
    }
}

void Sgd::step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("Sgd::step: " + std::to_string(params.size()) +
                                    " params vs " + std::to_string(grads.size()) + " grads");
    if (velocity_.empty())
        for (const Tensor* p : params) velocity_.emplace_back(p->shape());
    if (velocity_.size() != params.size())
        throw std::invalid_argument("Sgd::step: parameter list changed between calls");
    for (size_t i = 0; i < params.size(); ++i)
        sgd_update(*params[i], grads[i], velocity_[i], cfg_);
}

} // namespace unadv::optim
