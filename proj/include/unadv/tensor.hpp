#ifndef UNADV_TENSOR_HPP
#define UNADV_TENSOR_HPP

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace unadv {

using real = double;

// Dense row-major tensor. Image batches use the (batch, height, width,
// channels) layout; values are kept in [0,1] for image-role tensors and are
// unbounded for logits and gradients.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape, real fill = 0.0);
    Tensor(std::initializer_list<int> shape, real fill = 0.0);

    static Tensor image(int batch, int height, int width, int channels, real fill = 0.0) {
        return Tensor({batch, height, width, channels}, fill);
    }

    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
    int rank() const { return static_cast<int>(shape_.size()); }
    int64_t size() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    real* data() { return data_.data(); }
    const real* data() const { return data_.data(); }

    real& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    const real& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // 4-d accessors for (b, y, x, c) image batches.
    real& at(int b, int y, int x, int c) {
        return data_[static_cast<size_t>(flat(b, y, x, c))];
    }
    const real& at(int b, int y, int x, int c) const {
        return data_[static_cast<size_t>(flat(b, y, x, c))];
    }

    // 2-d accessors for (row, col) matrices.
    real& at(int r, int c) { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
    const real& at(int r, int c) const { return data_[static_cast<size_t>(r) * shape_[1] + c]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    std::string shape_str() const;

    void fill(real v);
    void clamp01();
    bool all_finite() const;

    // Single image view of row b in a (B,H,W,C) batch, copied out.
    Tensor slice_batch(int b) const;
    void set_batch(int b, const Tensor& img);

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    int64_t flat(int b, int y, int x, int c) const {
        return ((static_cast<int64_t>(b) * shape_[1] + y) * shape_[2] + x) * shape_[3] + c;
    }

    std::vector<int> shape_;
    std::vector<real> data_;
};

// Throws std::invalid_argument naming both shapes when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* where);

} // namespace unadv

#endif
