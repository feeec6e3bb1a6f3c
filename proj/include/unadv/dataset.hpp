#ifndef UNADV_DATASET_HPP
#define UNADV_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "unadv/tensor.hpp"

namespace unadv::data {

struct Dataset {
    Tensor train_images; // (N,H,W,C), values in [0,1]
    std::vector<int> train_labels;
    Tensor test_images;
    std::vector<int> test_labels;
    int num_classes = 0;
    std::vector<std::string> class_names;

    int train_count() const { return train_images.empty() ? 0 : train_images.dim(0); }
    int test_count() const { return test_images.empty() ? 0 : test_images.dim(0); }
};

// Procedural shape-classification benchmark. Classes are drawn from a fixed
// family of eight silhouettes (triangle, square, pentagon, hexagon, circle,
// star, cross, ring); each sample randomizes position, scale, rotation, fill
// and background colors, and box clutter, so silhouette is the only reliable
// class signal. Train and test draws come from disjoint seeded streams; the
// test split holds samples_per_class / 5 per class. Images are antialiased
// by 4x supersampling. k must be in [2,8]; size must be at least 8 pixels.
Dataset gen_shapes_dataset(int k, int samples_per_class, int size, uint64_t seed);

// Renders one shape image; exposed for tooling and tests.
Tensor render_shape_image(int label, int size, uint64_t sample_seed);

extern const std::vector<std::string> kShapeNames;

// Parses one CIFAR-10 binary batch (3073-byte records: label byte + 32*32*3
// channel-planar pixels), normalizing to [0,1]. Any record count is accepted
// here; byte-level validation failures report the offending offset.
void parse_cifar_batch(const std::string& path, Tensor& images, std::vector<int>& labels);

// Loads the canonical six-file CIFAR-10 set (data_batch_1..5 + test_batch,
// 10000 records each) from a directory.
Dataset load_cifar10(const std::string& dir);

// Writes images/labels back into the same binary record format (values are
// rounded to bytes); inverse of parse_cifar_batch for round-trip checks.
void export_cifar_batch(const std::string& path, const Tensor& images,
                        const std::vector<int>& labels);

} // namespace unadv::data

#endif
