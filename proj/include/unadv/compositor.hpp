#ifndef UNADV_COMPOSITOR_HPP
#define UNADV_COMPOSITOR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "unadv/autodiff.hpp"
#include "unadv/rng.hpp"
#include "unadv/tensor.hpp"

namespace unadv::comp {

// A square patch: RGB values in [0,1] plus an explicit binary stencil mask.
// Keeping the mask separate from the values means shape and content are
// independent knobs, and composite() can enforce bit-exact preservation of
// pixels outside the mask.
struct PatchParams {
    Tensor values; // (n,n,3)
    Tensor mask;   // (n,n), entries exactly 0 or 1
    int target_class = 0;

    int side() const { return values.shape().empty() ? 0 : values.shape()[0]; }

    // Mid-gray-ish uniform init in [0.4,0.6] with a full mask.
    static PatchParams make(int n, int target_class, uint64_t seed);
};

void validate_patch(const PatchParams& p);

// Placement of a patch on a canvas. Rotation/scale act about the patch
// center; (tx,ty) translate that center away from the canvas center, in
// pixels. rotation is radians, scale must be > 0, and the translation must
// keep the scaled patch's bounding box fully inside the canvas.
struct AffineTransform {
    real rotation = 0.0;
    real scale = 1.0;
    real tx = 0.0;
    real ty = 0.0;
};

AffineTransform identity_transform();

// Half-extent (in pixels) of the axis-aligned bounding box of an n-pixel
// patch under rotation/scale: scale * (n/2) * (|cos r| + |sin r|).
real bbox_half_extent(int n, real rotation, real scale);

// Sampling ranges for random placements. Rotation and scale are uniform over
// closed intervals; translation is uniform over every offset that keeps the
// transformed patch fully inside the m-pixel canvas. `seed` is the default
// stream seed recorded with training configs (make_rng()).
struct AffineRanges {
    int patch_side = 0;  // n
    int canvas_side = 0; // m
    real rot_lo = -kPi;
    real rot_hi = kPi;
    real scale_lo = 0.7;
    real scale_hi = 1.3;
    uint64_t seed = 0;

    static constexpr real kPi = 3.14159265358979323846;

    Rng make_rng() const { return Rng(seed); }
};

// True when every (rotation, scale) in the ranges leaves room on the canvas.
// Sampling only from feasible ranges keeps draws exactly uniform: no
// rejection step is ever needed.
bool ranges_feasible(const AffineRanges& r);

// Draw order is fixed: rotation, scale, tx, ty. Degenerate intervals
// (lo == hi) produce that exact value. Throws on invalid or infeasible
// ranges.
AffineTransform sample_affine(const AffineRanges& r, Rng& rng);

struct Warped {
    Tensor values; // (m,m,3), zero outside the patch footprint
    Tensor mask;   // (m,m), binary
};

// Places the patch on an m x m canvas: inverse-maps each canvas pixel
// through the transform and samples the patch bilinearly with zero fill.
// The mask is warped with the same interpolation, then thresholded at 0.5.
// Pixel centers sit on integer coordinates, so the identity transform (with
// matching grid parity) reproduces the zero-padded patch exactly. Throws if
// the transformed patch does not fit on the canvas.
Warped warp(const Tensor& values, const Tensor& mask, const AffineTransform& t, int m);

// out = image * (1 - mask) + warped * mask, elementwise over RGB.
// image (m,m,3) or (1,m,m,3); output has the same shape. Pixels where
// mask == 0 are copied bitwise. Throws if the mask is not exactly binary.
Tensor composite(const Tensor& image, const Tensor& warped_values, const Tensor& warped_mask);

// Tape versions, differentiable with respect to the patch values only (the
// mask and transform are fixed data). warp_op optionally reports the warped
// binary mask through out_mask.
ad::Tape::Ref warp_op(ad::Tape& tape, ad::Tape::Ref patch_values, const Tensor& mask,
                      const AffineTransform& t, int m, Tensor* out_mask = nullptr);
ad::Tape::Ref composite_op(ad::Tape& tape, const Tensor& image, ad::Tape::Ref warped_values,
                           const Tensor& warped_mask);

// Fused batch path used by patch training: warps the patch with a per-sample
// transform and composites onto images (B,m,m,3). Equivalent to stacking
// warp_op + composite_op per sample, with one tape node for the whole batch.
ad::Tape::Ref composite_batch(ad::Tape& tape, ad::Tape::Ref patch_values, const Tensor& mask,
                              const Tensor& images, const std::vector<AffineTransform>& transforms);

// Patch archive: an 8-bit PPM of the values next to a JSON sidecar holding
// {kind, target_class, n, mask, training_config_digest, seed}. Loading
// re-reads the quantized values, so save/load round-trips exactly for
// already-quantized patches.
void save_patch(const PatchParams& p, const std::string& image_path, const std::string& json_path,
                const std::string& kind, uint64_t training_config_digest, uint64_t seed);

struct PatchArchive {
    PatchParams patch;
    std::string kind;
    uint64_t training_config_digest = 0;
    uint64_t seed = 0;
};

PatchArchive load_patch(const std::string& image_path, const std::string& json_path);

} // namespace unadv::comp

#endif
