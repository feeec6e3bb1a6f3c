#include "unadv/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "unadv/optim.hpp"
#include "unadv/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace unadv::model {

std::vector<Tensor*> ModelParams::tensors() {
    std::vector<Tensor*> out;
    for (size_t i = 0; i < conv_w.size(); ++i) {
        out.push_back(&conv_w[i]);
        out.push_back(&conv_b[i]);
    }
    out.push_back(&head_w);
    out.push_back(&head_b);
    return out;
}

std::vector<const Tensor*> ModelParams::tensors() const {
    std::vector<const Tensor*> out;
    for (size_t i = 0; i < conv_w.size(); ++i) {
        out.push_back(&conv_w[i]);
        out.push_back(&conv_b[i]);
    }
    out.push_back(&head_w);
    out.push_back(&head_b);
    return out;
}

int64_t ModelParams::parameter_count() const {
    int64_t n = 0;
    for (const Tensor* t : tensors()) n += t->size();
    return n;
}

static void validate_config(const ModelConfig& c) {
    if (c.channels.empty()) throw std::invalid_argument("model: no conv blocks");
    if (c.kernel < 1 || c.kernel % 2 == 0)
        throw std::invalid_argument("model: kernel must be odd and positive");
    if (c.outputs < 1) throw std::invalid_argument("model: outputs must be positive");
    const int shrink = 1 << static_cast<int>(c.channels.size());
    if (c.input_h % shrink || c.input_w % shrink)
        throw std::invalid_argument("model: input " + std::to_string(c.input_h) + "x" +
                                    std::to_string(c.input_w) + " not divisible by " +
                                    std::to_string(shrink) + " for pooling");
}

ModelParams init_model(const ModelConfig& config, uint64_t seed) {
    validate_config(config);
    ModelParams p;
    p.config = config;
    Rng rng(seed);
    int ic = config.input_c;
    const int K = config.kernel;
    for (int oc : config.channels) {
        Tensor w({oc, K, K, ic});
        const real std_dev = std::sqrt(2.0 / (static_cast<real>(K) * K * ic));
        for (int64_t i = 0; i < w.size(); ++i) w[i] = rng.normal(0.0, std_dev);
        p.conv_w.push_back(std::move(w));
        p.conv_b.emplace_back(std::vector<int>{oc});
        ic = oc;
    }
    const int D = config.channels.back();
    p.head_w = Tensor({D, config.outputs});
    const real head_std = std::sqrt(1.0 / D);
    for (int64_t i = 0; i < p.head_w.size(); ++i) p.head_w[i] = rng.normal(0.0, head_std);
    p.head_b = Tensor({config.outputs});
    return p;
}

std::vector<ad::Tape::Ref> push_params(ad::Tape& t, const ModelParams& p, bool requires_grad) {
    std::vector<ad::Tape::Ref> refs;
    for (const Tensor* w : p.tensors()) refs.push_back(t.input(*w, requires_grad));
    return refs;
}

ad::Tape::Ref forward_from(ad::Tape& t, const ModelConfig& config, ad::Tape::Ref x,
                           const std::vector<ad::Tape::Ref>& param_refs) {
    const size_t expect = 2 * config.channels.size() + 2;
    if (param_refs.size() != expect)
        throw std::invalid_argument("forward_from: expected " + std::to_string(expect) +
                                    " parameter refs, got " + std::to_string(param_refs.size()));
    const int pad = config.kernel / 2;
    ad::Tape::Ref h = x;
    for (size_t i = 0; i < config.channels.size(); ++i)
        h = t.avgpool2(t.relu(t.conv2d(h, param_refs[2 * i], param_refs[2 * i + 1], pad)));
    auto feat = t.global_avgpool(h);
    return t.dense(feat, param_refs[expect - 2], param_refs[expect - 1]);
}

Tensor forward_logits(const ModelParams& p, const Tensor& x) {
    ad::Tape t;
    auto refs = push_params(t, p, false);
    auto out = forward_from(t, p.config, t.input(x), refs);
    return t.value(out);
}

std::vector<int> predict(const ModelParams& p, const Tensor& x) {
    const Tensor logits = forward_logits(p, x);
    const int B = logits.dim(0), K = logits.dim(1);
    std::vector<int> labels(static_cast<size_t>(B));
    for (int bi = 0; bi < B; ++bi) {
        int best = 0;
        for (int k = 1; k < K; ++k)
            if (logits.at(bi, k) > logits.at(bi, best)) best = k;
        labels[static_cast<size_t>(bi)] = best;
    }
    return labels;
}

real accuracy(const ModelParams& p, const Tensor& images, const std::vector<int>& labels,
              int batch_size) {
    const int N = images.dim(0);
    if (static_cast<size_t>(N) != labels.size())
        throw std::invalid_argument("accuracy: image/label count mismatch");
    if (N == 0) throw std::invalid_argument("accuracy: empty evaluation set");
    int correct = 0;
    for (int start = 0; start < N; start += batch_size) {
        const int n = std::min(batch_size, N - start);
        Tensor batch({n, images.dim(1), images.dim(2), images.dim(3)});
        for (int i = 0; i < n; ++i) batch.set_batch(i, images.slice_batch(start + i));
        const std::vector<int> pred = predict(p, batch);
        for (int i = 0; i < n; ++i)
            if (pred[static_cast<size_t>(i)] == labels[static_cast<size_t>(start + i)]) ++correct;
    }
    return static_cast<real>(correct) / N;
}

namespace {

// Shared batch loop for both heads. `targets` is empty for classification.
ModelParams train_impl(const Tensor& images, const std::vector<int>& labels,
                       const Tensor& targets, const ModelConfig& mc, const TrainConfig& tc,
                       std::vector<EpochLog>* log) {
    const int N = images.empty() ? 0 : images.dim(0);
    if (N == 0) throw std::invalid_argument("train: empty dataset");
    if (tc.batch_size < 1) throw std::invalid_argument("train: batch_size must be positive");
    if (tc.epochs < 1) throw std::invalid_argument("train: epochs must be positive");
    const bool classify = mc.head == Head::classification;
    if (classify && static_cast<size_t>(N) != labels.size())
        throw std::invalid_argument("train: image/label count mismatch");
    if (!classify && (targets.rank() != 2 || targets.dim(0) != N || targets.dim(1) != mc.outputs))
        throw std::invalid_argument("train: targets must be (N,outputs)");
    if (classify)
        for (int y : labels)
            if (y < 0 || y >= mc.outputs)
                throw std::invalid_argument("train: label " + std::to_string(y) +
                                            " outside [0," + std::to_string(mc.outputs) + ")");

    ModelParams p = init_model(mc, fan_seed(tc.seed, "model-init"));
    optim::Sgd opt(optim::SgdConfig{tc.learning_rate, tc.momentum, tc.weight_decay});

    std::vector<int> order(static_cast<size_t>(N));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        Rng shuffle_rng(fan_seed(tc.seed, "epoch-shuffle", static_cast<uint64_t>(epoch)));
        for (int i = N - 1; i > 0; --i)
            std::swap(order[static_cast<size_t>(i)],
                      order[static_cast<size_t>(shuffle_rng.below(i + 1))]);

        real loss_sum = 0.0;
        int correct = 0;
        for (int start = 0; start < N; start += tc.batch_size) {
            const int n = std::min(tc.batch_size, N - start);
            Tensor batch({n, images.dim(1), images.dim(2), images.dim(3)});
            std::vector<int> batch_labels(static_cast<size_t>(n));
            Tensor batch_targets = classify ? Tensor() : Tensor({n, mc.outputs});
            for (int i = 0; i < n; ++i) {
                const int src = order[static_cast<size_t>(start + i)];
                batch.set_batch(i, images.slice_batch(src));
                if (classify)
                    batch_labels[static_cast<size_t>(i)] = labels[static_cast<size_t>(src)];
                else
                    for (int k = 0; k < mc.outputs; ++k)
                        batch_targets.at(i, k) = targets.at(src, k);
            }

            ad::Tape t;
            auto refs = push_params(t, p, true);
            auto out = forward_from(t, mc, t.input(batch), refs);
            auto loss = classify ? t.cross_entropy(out, batch_labels)
                                 : t.mse(out, batch_targets);
            loss_sum += t.value(loss)[0] * n;
            if (classify) {
                const Tensor& lg = t.value(out);
                for (int i = 0; i < n; ++i) {
                    int best = 0;
                    for (int k = 1; k < mc.outputs; ++k)
                        if (lg.at(i, k) > lg.at(i, best)) best = k;
                    if (best == batch_labels[static_cast<size_t>(i)]) ++correct;
                }
            }
            auto grads = t.backward(loss, refs);
            opt.step(p.tensors(), grads);
        }
        if (log)
            log->push_back({epoch, loss_sum / N,
                            classify ? static_cast<real>(correct) / N : real(0)});
    }
    return p;
}

} // namespace

ModelParams train_classifier(const data::Dataset& dataset, const ModelConfig& mc,
                             const TrainConfig& tc, std::vector<EpochLog>* log) {
    if (mc.head != Head::classification)
        throw std::invalid_argument("train_classifier: classification head required");
    return train_impl(dataset.train_images, dataset.train_labels, Tensor(), mc, tc, log);
}

ModelParams train_regressor(const Tensor& images, const Tensor& targets, const ModelConfig& mc,
                            const TrainConfig& tc, std::vector<EpochLog>* log) {
    if (mc.head != Head::regression)
        throw std::invalid_argument("train_regressor: regression head required");
    return train_impl(images, {}, targets, mc, tc, log);
}

uint64_t weight_digest(const ModelParams& p) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const Tensor* t : p.tensors()) {
        const uint64_t part = fnv1a64(t->data(), static_cast<size_t>(t->size()) * sizeof(real));
        h = mix64(h ^ part);
    }
    return h;
}

namespace {

void put_u32(std::ofstream& f, uint32_t v) {
    f.write(reinterpret_cast<const char*>(&v), 4);
}

uint32_t get_u32(std::ifstream& f, const std::string& path) {
    uint32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 4);
    if (!f) throw std::runtime_error(path + ": truncated checkpoint");
    return v;
}

constexpr char kMagic[8] = {'U', 'N', 'A', 'D', 'V', 'C', 'K', 'P'};
constexpr uint32_t kVersion = 1;

} // namespace

void save_checkpoint(const ModelParams& p, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write(kMagic, 8);
    put_u32(f, kVersion);
    put_u32(f, p.config.head == Head::classification ? 0 : 1);
    put_u32(f, static_cast<uint32_t>(p.config.input_h));
    put_u32(f, static_cast<uint32_t>(p.config.input_w));
    put_u32(f, static_cast<uint32_t>(p.config.input_c));
    put_u32(f, static_cast<uint32_t>(p.config.kernel));
    put_u32(f, static_cast<uint32_t>(p.config.outputs));
    put_u32(f, static_cast<uint32_t>(p.config.channels.size()));
    for (int c : p.config.channels) put_u32(f, static_cast<uint32_t>(c));
    for (const Tensor* t : p.tensors()) {
        put_u32(f, static_cast<uint32_t>(t->rank()));
        for (int i = 0; i < t->rank(); ++i) put_u32(f, static_cast<uint32_t>(t->dim(i)));
        for (int64_t i = 0; i < t->size(); ++i) {
            const float v = static_cast<float>((*t)[i]);
            f.write(reinterpret_cast<const char*>(&v), 4);
        }
    }
    if (!f) throw std::runtime_error("write failed for " + path);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error(path + ": not a model checkpoint (bad magic)");
    const uint32_t version = get_u32(f, path);
    if (version != kVersion)
        throw std::runtime_error(path + ": unsupported checkpoint version " +
                                 std::to_string(version));
    ModelConfig mc;
    mc.head = get_u32(f, path) == 0 ? Head::classification : Head::regression;
    mc.input_h = static_cast<int>(get_u32(f, path));
    mc.input_w = static_cast<int>(get_u32(f, path));
    mc.input_c = static_cast<int>(get_u32(f, path));
    mc.kernel = static_cast<int>(get_u32(f, path));
    mc.outputs = static_cast<int>(get_u32(f, path));
    const uint32_t blocks = get_u32(f, path);
    mc.channels.clear();
    for (uint32_t i = 0; i < blocks; ++i) mc.channels.push_back(static_cast<int>(get_u32(f, path)));

    ModelParams p = init_model(mc, 0);
    for (Tensor* t : p.tensors()) {
        const uint32_t rank = get_u32(f, path);
        if (static_cast<int>(rank) != t->rank())
            throw std::runtime_error(path + ": tensor rank mismatch");
        for (uint32_t i = 0; i < rank; ++i)
            if (static_cast<int>(get_u32(f, path)) != t->dim(static_cast<int>(i)))
                throw std::runtime_error(path + ": tensor shape mismatch");
        for (int64_t i = 0; i < t->size(); ++i) {
            float v = 0.0f;
            f.read(reinterpret_cast<char*>(&v), 4);
            if (!f) throw std::runtime_error(path + ": truncated checkpoint");
            (*t)[i] = static_cast<real>(v);
        }
    }
    f.peek();
    if (!f.eof()) throw std::runtime_error(path + ": trailing bytes after checkpoint payload");
    return p;
}

} // namespace unadv::model
