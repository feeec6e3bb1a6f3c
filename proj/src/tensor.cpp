#include "unadv/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace unadv {

static int64_t checked_count(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) {
        if (d < 0)
            throw std::invalid_argument("Tensor: negative dimension " + std::to_string(d));
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape, real fill)
    : shape_(std::move(shape)), data_(static_cast<size_t>(checked_count(shape_)), fill) {}

Tensor::Tensor(std::initializer_list<int> shape, real fill)
    : Tensor(std::vector<int>(shape), fill) {}

std::string Tensor::shape_str() const {
    std::string s = "(";
    for (size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape_[i]);
    }
    return s + ")";
}

void Tensor::fill(real v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::clamp01() {
    for (real& v : data_) v = std::min(1.0, std::max(0.0, v));
}

bool Tensor::all_finite() const {
    for (real v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor Tensor::slice_batch(int b) const {
    if (rank() != 4) throw std::invalid_argument("slice_batch: rank-4 tensor required");
    Tensor out({1, shape_[1], shape_[2], shape_[3]});
    const int64_t n = out.size();
    const real* src = data_.data() + static_cast<int64_t>(b) * n;
    std::copy(src, src + n, out.data());
    return out;
}

void Tensor::set_batch(int b, const Tensor& img) {
    const int64_t n = static_cast<int64_t>(shape_[1]) * shape_[2] * shape_[3];
    if (img.size() != n)
        throw std::invalid_argument("set_batch: size mismatch " + img.shape_str() + " vs " + shape_str());
    std::copy(img.data(), img.data() + n, data_.data() + static_cast<int64_t>(b) * n);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(where) + ": shape mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
}

} // namespace unadv
