#include "unadv/patch_forge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "unadv/image_io.hpp"
#include "unadv/optim.hpp"
#include "unadv/rng.hpp"

namespace unadv::patch {

namespace {

void require_classifier(const model::ModelParams& m, int target_class, const char* where) {
    if (m.config.head != model::Head::classification)
        throw std::invalid_argument(std::string(where) + ": needs a classification model");
    if (target_class < 0 || target_class >= m.config.outputs)
        throw std::invalid_argument(std::string(where) + ": target class " +
                                    std::to_string(target_class) + " outside model range [0," +
                                    std::to_string(m.config.outputs) + ")");
}

void require_matching_images(const model::ModelParams& m, const Tensor& images, const char* where) {
    const auto& s = images.shape();
    if (s.size() != 4 || s[1] != m.config.input_h || s[2] != m.config.input_w ||
        s[3] != m.config.input_c)
        throw std::invalid_argument(std::string(where) + ": dataset images " + images.shape_str() +
                                    " do not match the model input " +
                                    std::to_string(m.config.input_h) + "x" +
                                    std::to_string(m.config.input_w) + "x" +
                                    std::to_string(m.config.input_c));
}

std::vector<int> class_indices(const std::vector<int>& labels, int target_class) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(labels.size()); ++i)
        if (labels[i] == target_class) idx.push_back(i);
    return idx;
}

Tensor image_row(const Tensor& images, int i) {
    Tensor out({images.dim(1), images.dim(2), images.dim(3)});
    const real* src = images.data() + static_cast<int64_t>(i) * out.size();
    std::copy(src, src + out.size(), out.data());
    return out;
}

comp::PatchParams image_as_patch(const Tensor& images, int index, int target_class,
                                 int patch_side) {
    comp::PatchParams p;
    p.values = img::resize_area(images.slice_batch(index), patch_side, patch_side);
    p.values.clamp01();
    p.mask = Tensor({patch_side, patch_side}, 1.0);
    p.target_class = target_class;
    return p;
}

// Per-image cross-entropy of the frozen model over a subset of rows,
// evaluated in chunks.
std::vector<real> subset_losses(const model::ModelParams& m, const Tensor& images,
                                const std::vector<int>& rows, int target_class) {
    std::vector<real> losses(rows.size());
    const int chunk = 256;
    const int h = images.dim(1), w = images.dim(2), c = images.dim(3);
    for (size_t base = 0; base < rows.size(); base += chunk) {
        const int n = static_cast<int>(std::min<size_t>(chunk, rows.size() - base));
        Tensor batch({n, h, w, c});
        for (int j = 0; j < n; ++j) batch.set_batch(j, images.slice_batch(rows[base + j]));
        Tensor logits = model::forward_logits(m, batch);
        const int k = logits.dim(1);
        for (int j = 0; j < n; ++j) {
            real mx = logits.at(j, 0);
            for (int o = 1; o < k; ++o) mx = std::max(mx, logits.at(j, o));
            real denom = 0.0;
            for (int o = 0; o < k; ++o) denom += std::exp(logits.at(j, o) - mx);
            losses[base + j] = std::log(denom) - (logits.at(j, target_class) - mx);
        }
    }
    return losses;
}

} // namespace

comp::AffineRanges PatchTrainConfig::ranges(int patch_side, int canvas_side) const {
    comp::AffineRanges r;
    r.patch_side = patch_side;
    r.canvas_side = canvas_side;
    r.rot_lo = rot_lo;
    r.rot_hi = rot_hi;
    r.scale_lo = scale_lo;
    r.scale_hi = scale_hi;
    r.seed = seed;
    return r;
}

comp::PatchParams train_patch(const model::ModelParams& m, const data::Dataset& data,
                              int target_class, int patch_side, const PatchTrainConfig& config,
                              std::vector<real>* epoch_loss) {
    require_classifier(m, target_class, "train_patch");
    require_matching_images(m, data.train_images, "train_patch");
    if (config.epochs < 0 || config.batch_size < 1 || !(config.step > 0.0))
        throw std::invalid_argument("train_patch: epochs must be >= 0, batch >= 1, step > 0");
    if (m.config.input_h != m.config.input_w)
        throw std::invalid_argument("train_patch: square model input required");

    const std::vector<int> targets = class_indices(data.train_labels, target_class);
    if (targets.empty())
        throw std::invalid_argument("train_patch: no training samples of class " +
                                    std::to_string(target_class));

    comp::PatchParams patch =
        comp::PatchParams::make(patch_side, target_class, fan_seed(config.seed, "patch-init"));
    if (epoch_loss) epoch_loss->clear();
    if (config.epochs == 0) return patch;

    const int canvas = m.config.input_h;
    const comp::AffineRanges ranges = config.ranges(patch_side, canvas);
    if (!comp::ranges_feasible(ranges))
        throw std::invalid_argument("train_patch: a " + std::to_string(patch_side) +
                                    "px patch cannot fit the " + std::to_string(canvas) +
                                    "px model input over the placement ranges");

    const int n_total = data.train_count();
    const int batch = std::min(config.batch_size, n_total);
    Rng affine_rng(fan_seed(config.seed, "patch-affine"));

    std::vector<int> order(static_cast<size_t>(n_total));
    std::iota(order.begin(), order.end(), 0);
    real prev_mean = std::numeric_limits<real>::infinity();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(fan_seed(config.seed, "patch-shuffle", static_cast<uint64_t>(epoch)));
        for (int i = n_total - 1; i > 0; --i)
            std::swap(order[static_cast<size_t>(i)],
                      order[static_cast<size_t>(shuffle_rng.below(i + 1))]);

        real loss_sum = 0.0;
        int64_t loss_count = 0;
        for (int base = 0; base < n_total; base += batch) {
            const int hi = std::min(base + batch, n_total);
            std::vector<int> rows;
            for (int i = base; i < hi; ++i)
                if (data.train_labels[static_cast<size_t>(order[static_cast<size_t>(i)])] ==
                    target_class)
                    rows.push_back(order[static_cast<size_t>(i)]);
            if (rows.empty()) continue;

            const int t = static_cast<int>(rows.size());
            Tensor images({t, canvas, canvas, 3});
            for (int j = 0; j < t; ++j) images.set_batch(j, data.train_images.slice_batch(rows[j]));
            std::vector<comp::AffineTransform> tfs;
            tfs.reserve(rows.size());
            for (int j = 0; j < t; ++j) tfs.push_back(comp::sample_affine(ranges, affine_rng));

            ad::Tape tape;
            auto patch_ref = tape.input(patch.values, true);
            auto x = comp::composite_batch(tape, patch_ref, patch.mask, images, tfs);
            auto params = model::push_params(tape, m, false);
            auto logits = model::forward_from(tape, m.config, x, params);
            const std::vector<int> labels(static_cast<size_t>(t), target_class);
            auto loss = tape.cross_entropy(logits, labels);
            const real loss_value = tape.value(loss)[0];
            Tensor grad = tape.backward(loss, {patch_ref})[0];
            optim::sign_update(patch.values, grad, config.step);

            loss_sum += loss_value * t;
            loss_count += t;
        }
        const real mean = loss_sum / static_cast<real>(loss_count);
        if (epoch_loss) epoch_loss->push_back(mean);
        if (prev_mean - mean < config.plateau_tol) break;
        prev_mean = mean;
    }
    return patch;
}

comp::PatchParams best_loss_image_patch(const model::ModelParams& m, const data::Dataset& data,
                                        int target_class, int patch_side) {
    require_classifier(m, target_class, "best_loss_image_patch");
    require_matching_images(m, data.train_images, "best_loss_image_patch");
    if (patch_side < 1)
        throw std::invalid_argument("best_loss_image_patch: patch side must be >= 1");
    const std::vector<int> rows = class_indices(data.train_labels, target_class);
    if (rows.empty())
        throw std::invalid_argument("best_loss_image_patch: no training samples of class " +
                                    std::to_string(target_class));
    const std::vector<real> losses = subset_losses(m, data.train_images, rows, target_class);
    size_t best = 0;
    for (size_t j = 1; j < losses.size(); ++j)
        if (losses[j] < losses[best]) best = j; // strict: ties keep the lowest index
    return image_as_patch(data.train_images, rows[best], target_class, patch_side);
}

comp::PatchParams baseline_patch(BaselineKind kind, const data::Dataset& data, int target_class,
                                 int patch_side, uint64_t seed) {
    if (patch_side < 1) throw std::invalid_argument("baseline_patch: patch side must be >= 1");
    if (target_class < 0)
        throw std::invalid_argument("baseline_patch: target class must be >= 0");
    switch (kind) {
    case BaselineKind::random_image: {
        const std::vector<int> rows = class_indices(data.train_labels, target_class);
        if (rows.empty())
            throw std::invalid_argument("baseline_patch: no training samples of class " +
                                        std::to_string(target_class));
        Rng rng(seed);
        const int pick = rows[static_cast<size_t>(rng.below(static_cast<int64_t>(rows.size())))];
        return image_as_patch(data.train_images, pick, target_class, patch_side);
    }
    case BaselineKind::fixed_noise: {
        comp::PatchParams p;
        p.values = Tensor({patch_side, patch_side, 3});
        Rng rng(seed);
        for (int64_t i = 0; i < p.values.size(); ++i) p.values[i] = rng.normal(0.5, 0.25);
        p.values.clamp01();
        p.mask = Tensor({patch_side, patch_side}, 1.0);
        p.target_class = target_class;
        return p;
    }
    }
    throw std::invalid_argument("baseline_patch: unknown kind " +
                                std::to_string(static_cast<int>(kind)));
}

EvalTable evaluate_patched(const model::ModelParams& m, const data::Dataset& data,
                           const std::map<int, comp::PatchParams>& patches,
                           const comp::AffineRanges& ranges, uint64_t seed, const PostFn& post) {
    if (m.config.head != model::Head::classification)
        throw std::invalid_argument("evaluate_patched: needs a classification model");
    require_matching_images(m, data.test_images, "evaluate_patched");
    if (m.config.input_h != m.config.input_w)
        throw std::invalid_argument("evaluate_patched: square model input required");

    const int n = data.test_count();
    const int canvas = m.config.input_h;
    EvalTable table;
    table.class_total.assign(static_cast<size_t>(data.num_classes), 0);
    table.class_correct.assign(static_cast<size_t>(data.num_classes), 0);
    table.class_accuracy.assign(static_cast<size_t>(data.num_classes), 0.0);

    const int chunk = 256;
    for (int base = 0; base < n; base += chunk) {
        const int cnt = std::min(chunk, n - base);
        Tensor batch({cnt, canvas, canvas, 3});
        for (int j = 0; j < cnt; ++j) {
            const int i = base + j;
            const int cls = data.test_labels[static_cast<size_t>(i)];
            const auto it = patches.find(cls);
            if (it == patches.end())
                throw std::invalid_argument("evaluate_patched: no patch for class " +
                                            std::to_string(cls));
            const comp::PatchParams& p = it->second;
            comp::AffineRanges r = ranges;
            r.patch_side = p.side();
            r.canvas_side = canvas;
            Rng rng(fan_seed(seed, "eval-affine", static_cast<uint64_t>(i)));
            const comp::AffineTransform t = comp::sample_affine(r, rng);
            const comp::Warped w = comp::warp(p.values, p.mask, t, canvas);
            Tensor composited = comp::composite(image_row(data.test_images, i), w.values, w.mask);
            if (post) {
                composited = post(composited, fan_seed(seed, "eval-post", static_cast<uint64_t>(i)));
                if (composited.shape() != std::vector<int>{canvas, canvas, 3})
                    throw std::runtime_error(
                        "evaluate_patched: post transform changed the image shape to " +
                        composited.shape_str());
            }
            batch.set_batch(j, composited);
        }
        const std::vector<int> pred = model::predict(m, batch);
        for (int j = 0; j < cnt; ++j) {
            const int cls = data.test_labels[static_cast<size_t>(base + j)];
            ++table.total;
            ++table.class_total[static_cast<size_t>(cls)];
            if (pred[static_cast<size_t>(j)] == cls) {
                ++table.correct;
                ++table.class_correct[static_cast<size_t>(cls)];
            }
        }
    }

    table.overall = table.total ? static_cast<real>(table.correct) / table.total : 0.0;
    for (int c = 0; c < data.num_classes; ++c)
        if (table.class_total[static_cast<size_t>(c)] > 0)
            table.class_accuracy[static_cast<size_t>(c)] =
                static_cast<real>(table.class_correct[static_cast<size_t>(c)]) /
                static_cast<real>(table.class_total[static_cast<size_t>(c)]);
    return table;
}

} // namespace unadv::patch
