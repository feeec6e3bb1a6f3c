#ifndef UNADV_MODEL_HPP
#define UNADV_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "unadv/autodiff.hpp"
#include "unadv/dataset.hpp"
#include "unadv/tensor.hpp"

namespace unadv::model {

enum class Head { classification, regression };

// Small convnet: per block conv(3x3, pad 1) -> relu -> 2x2 average pool,
// then global average pooling and an affine head. On 32x32x3 with channels
// {16,32,64} this is about 24k parameters.
struct ModelConfig {
    int input_h = 32;
    int input_w = 32;
    int input_c = 3;
    std::vector<int> channels = {16, 32, 64};
    int kernel = 3;
    Head head = Head::classification;
    int outputs = 10;
};

struct ModelParams {
    ModelConfig config;
    std::vector<Tensor> conv_w; // (OC,K,K,IC) per block
    std::vector<Tensor> conv_b;
    Tensor head_w; // (D, outputs)
    Tensor head_b;

    // Flat views in a fixed order: conv_w[0], conv_b[0], ..., head_w, head_b.
    std::vector<Tensor*> tensors();
    std::vector<const Tensor*> tensors() const;
    int64_t parameter_count() const;
};

// He-style seeded initialization (normal, std sqrt(2/fan_in); biases zero).
ModelParams init_model(const ModelConfig& config, uint64_t seed);

// Pushes the parameters onto a tape as leaves, in ModelParams::tensors()
// order. requires_grad=false freezes them (no gradient storage at all).
std::vector<ad::Tape::Ref> push_params(ad::Tape& t, const ModelParams& p, bool requires_grad);

// Builds the network from an existing input ref (so composited images keep
// their gradient path). param_refs must come from push_params. Returns the
// output ref: (B, outputs) logits or regression values.
ad::Tape::Ref forward_from(ad::Tape& t, const ModelConfig& config, ad::Tape::Ref x,
                           const std::vector<ad::Tape::Ref>& param_refs);

// Pure evaluation: fresh frozen tape per call, no side effects on params.
Tensor forward_logits(const ModelParams& p, const Tensor& x);

std::vector<int> predict(const ModelParams& p, const Tensor& x);

// Fraction of correct argmax predictions, evaluated in batches.
real accuracy(const ModelParams& p, const Tensor& images, const std::vector<int>& labels,
              int batch_size = 256);

struct TrainConfig {
    real learning_rate = 0.1;
    real momentum = 0.9;
    real weight_decay = 1e-4;
    int batch_size = 128;
    int epochs = 30;
    uint64_t seed = 0;
};

struct EpochLog {
    int epoch = 0;
    real loss = 0.0;     // mean cross-entropy (or mse) over the epoch
    real accuracy = 0.0; // train accuracy measured on pre-update logits
};

// Deterministic SGD training; identical (dataset, configs) give bit-identical
// weights. Shuffling and initialization derive from config.seed.
ModelParams train_classifier(const data::Dataset& dataset, const ModelConfig& mc,
                             const TrainConfig& tc, std::vector<EpochLog>* log = nullptr);

// Same loop against mean-squared error on (N,outputs) targets.
ModelParams train_regressor(const Tensor& images, const Tensor& targets, const ModelConfig& mc,
                            const TrainConfig& tc, std::vector<EpochLog>* log = nullptr);

// FNV-1a over the raw double weight bytes, in tensors() order; detects any
// in-memory weight change.
uint64_t weight_digest(const ModelParams& p);

// Checkpoint file layout (all integers little-endian uint32 unless noted):
//   bytes 0..7   magic "UNADVCKP"
//   8            format version (1)
//   12           head kind: 0 classification, 1 regression
//   16,20,24     input_h, input_w, input_c
//   28           kernel
//   32           outputs
//   36           number of conv blocks L
//   40..         L channel counts
//   then, for each tensor in tensors() order:
//     rank, then rank dims, then numel float32 little-endian values
void save_checkpoint(const ModelParams& p, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

} // namespace unadv::model

#endif
