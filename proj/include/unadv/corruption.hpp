#ifndef UNADV_CORRUPTION_HPP
#define UNADV_CORRUPTION_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>

#include "unadv/tensor.hpp"

namespace unadv::corr {

// The fifteen synthetic corruptions, applied at severities 1-5 scaled for
// 32x32 inputs; severity 0 is the exact identity for every kind.
enum class Kind {
    gaussian_noise,
    shot_noise,
    impulse_noise,
    defocus_blur,
    glass_blur,
    motion_blur,
    zoom_blur,
    snow,
    frost,
    fog,
    brightness,
    contrast,
    elastic,
    pixelate,
    jpeg,
};

inline constexpr int kKindCount = 15;
inline constexpr int kSeverityCount = 5;

const std::array<Kind, kKindCount>& all_kinds();
std::string to_string(Kind kind);
Kind kind_from_string(const std::string& name);

struct CorruptionSpec {
    Kind kind = Kind::gaussian_noise;
    int severity = 0; // 0 disables, 1..5
    uint64_t seed = 0;
};

// Applies one corruption to an (H,W,3) image in [0,1]. Stochastic kinds draw
// everything from image_seed, so the result is a pure function of the
// arguments. Output is clamped to [0,1].
Tensor corrupt_image(const Tensor& image, Kind kind, int severity, uint64_t image_seed);

// Batched form over (B,H,W,3). Image i uses fan_seed(spec.seed,
// "corrupt-image", i), so splitting or reordering the batch cannot change
// per-image results.
Tensor corrupt(const Tensor& batch, const CorruptionSpec& spec);

// Adapter for evaluate_patched-style hooks: binds the spec and folds the
// hook's per-image seed into the corruption stream.
std::function<Tensor(const Tensor&, uint64_t)> post_fn(const CorruptionSpec& spec);

// The versioned severity parameter tables driving corrupt, as a JSON
// document; identical across runs.
std::string corruption_catalog_json();

} // namespace unadv::corr

#endif
