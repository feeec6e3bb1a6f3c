#ifndef UNADV_PATCH_FORGE_HPP
#define UNADV_PATCH_FORGE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "unadv/compositor.hpp"
#include "unadv/dataset.hpp"
#include "unadv/model.hpp"

namespace unadv::patch {

struct PatchTrainConfig {
    int epochs = 30;
    real step = 0.1;         // sign-update step, constant schedule
    int batch_size = 512;    // capped at the dataset size
    real plateau_tol = 1e-4; // stop when epoch-mean loss improves less than this
    // Rotation/scale bounds for the per-sample placements; sides are derived
    // from the patch and the model input by the consumers.
    real rot_lo = -comp::AffineRanges::kPi;
    real rot_hi = comp::AffineRanges::kPi;
    real scale_lo = 0.7;
    real scale_hi = 1.3;
    uint64_t seed = 0;

    comp::AffineRanges ranges(int patch_side, int canvas_side) const;
};

// Trains a class-conditional patch against a frozen classifier: every epoch
// walks the shuffled training set in batches; samples of target_class get
// the patch composited at a fresh random placement each, the batch loss is
// the mean cross-entropy over those samples, and the patch values take one
// sign step per batch (clamped to [0,1]). Stops early once the epoch-mean
// loss improves by less than plateau_tol. The model is read-only throughout.
// epochs == 0 returns the seeded initialization untouched.
comp::PatchParams train_patch(const model::ModelParams& m, const data::Dataset& data,
                              int target_class, int patch_side, const PatchTrainConfig& config,
                              std::vector<real>* epoch_loss = nullptr);

// The training image of target_class with the smallest model cross-entropy,
// box-downscaled to patch_side. Ties break toward the lowest dataset index.
comp::PatchParams best_loss_image_patch(const model::ModelParams& m, const data::Dataset& data,
                                        int target_class, int patch_side);

enum class BaselineKind { random_image, fixed_noise };

// random_image: a uniformly drawn training image of the class, downscaled.
// fixed_noise: a seed-determined Gaussian pattern (mean 0.5, sd 0.25),
// clamped to [0,1]. Both carry a full mask.
comp::PatchParams baseline_patch(BaselineKind kind, const data::Dataset& data, int target_class,
                                 int patch_side, uint64_t seed);

// Optional post-composite image transform (corruptions bind to this);
// receives the composited (H,W,3) image and a per-image seed.
using PostFn = std::function<Tensor(const Tensor& image, uint64_t seed)>;

struct EvalTable {
    int64_t total = 0;
    int64_t correct = 0;
    real overall = 0.0;
    std::vector<int64_t> class_total;
    std::vector<int64_t> class_correct;
    std::vector<real> class_accuracy; // 0 for classes absent from the test set
};

// For every test image: composite its class's patch at a random placement,
// apply `post` if given, classify. Placements and post seeds derive from
// (seed, image index), so results are independent of evaluation order.
// `ranges` supplies rotation/scale bounds; its sides are overridden per
// patch. Throws if a test image's class has no patch.
EvalTable evaluate_patched(const model::ModelParams& m, const data::Dataset& data,
                           const std::map<int, comp::PatchParams>& patches,
                           const comp::AffineRanges& ranges, uint64_t seed,
                           const PostFn& post = {});

} // namespace unadv::patch

#endif
