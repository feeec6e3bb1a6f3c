#ifndef UNADV_RENDER_FORGE_HPP
#define UNADV_RENDER_FORGE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "unadv/autodiff.hpp"
#include "unadv/corruption.hpp"
#include "unadv/model.hpp"
#include "unadv/tensor.hpp"

namespace unadv::rf {

// Triangle mesh with per-corner UVs (OBJ-style v/vt indexing) and the class
// label the textured object should be recognized as.
struct Mesh {
    std::vector<std::array<real, 3>> vertices;
    std::vector<std::array<real, 2>> uvs; // in [0,1]^2
    std::vector<std::array<int, 3>> tri_vertices;
    std::vector<std::array<int, 3>> tri_uvs; // parallel to tri_vertices
    int label = 0;

    std::array<real, 3> center() const;   // bounding-box center
    real bounding_radius() const;         // max vertex distance from center()
};

// Checks index ranges, UV bounds, and that no triangle is degenerate.
void validate_mesh(const Mesh& mesh);

// Minimal OBJ subset: v, vt, and triangular f lines with v/vt indices.
// Unknown keywords are skipped. save/load round-trips a mesh exactly.
Mesh load_obj(const std::string& path, int label);
void save_obj(const std::string& path, const Mesh& mesh);

// Procedural desk-scale meshes, centered at the origin. Each face gets its
// own inset cell of the UV atlas, so nearest-texel lookups never bleed
// across faces.
Mesh make_cube(real side);
Mesh make_cylinder(real radius, real height, int segments);
Mesh make_plane_silhouette(real span); // low-poly aircraft: fuselage, wings, tail, fin

// Square RGB texture being optimized; always kept in [0,1].
struct TextureParams {
    Tensor values; // (n,n,3)

    int side() const { return values.shape().empty() ? 0 : values.shape()[0]; }

    // Mid-gray-ish uniform init in [0.4,0.6], like patches.
    static TextureParams make(int n, uint64_t seed);
};

void validate_texture(const TextureParams& t);

// Camera orbit around `target` plus a directional light. The camera sits at
// target + distance * (cos(el)sin(az), sin(el), cos(el)cos(az)) and looks at
// the target; up is +Y, switching to +Z near the poles.
struct SceneConfig {
    real azimuth = 0.0;   // radians around +Y
    real elevation = 0.5; // radians above the horizontal plane
    real distance = 3.0;
    real fov_deg = 45.0;
    std::array<real, 3> target = {0.0, 0.0, 0.0};
    std::array<real, 3> light_dir = {0.4, 1.0, 0.25}; // toward the light
};

std::array<real, 3> camera_position(const SceneConfig& scene);

// Throws unless the camera lies outside the mesh bounding sphere and the
// scene parameters are sane.
void validate_scene(const Mesh& mesh, const SceneConfig& scene);

// Per-pixel interpolated UVs plus a binary coverage flag; uncovered pixels
// carry zero UVs.
struct UVImage {
    Tensor uv;      // (H,W,2)
    Tensor covered; // (H,W), entries exactly 0 or 1
};

// Forward renderer: perspective projection, near-plane clipping, depth
// buffer, nearest-texel lookup, flat two-sided Lambertian shading,
// composited over the background ((H,W,3) or (1,H,W,3); output matches).
// Not differentiable.
Tensor rasterize(const Mesh& mesh, const TextureParams& texture, const SceneConfig& scene,
                 const Tensor& background);

// Same geometry pass, but reports interpolated UVs instead of shaded colors.
// Its covered set equals rasterize's foreground mask by construction (both
// run the identical fragment core).
UVImage rasterize_uv(const Mesh& mesh, const SceneConfig& scene, int h, int w);

// Differentiable stand-in for the renderer: covered pixels read their
// nearest texel (floor(u*n), floor(v*n), clamped — the same quantization
// rasterize uses), everything else keeps the background. Linear in the
// texture; the Jacobian is a 0/1 selection matrix.
Tensor surrogate_composite(const UVImage& x_uv, const Tensor& texture, const Tensor& background);
ad::Tape::Ref surrogate_composite_op(ad::Tape& tape, ad::Tape::Ref texture, const UVImage& x_uv,
                                     const Tensor& background);

// Straight-through estimator: the node's value is x_rend bitwise, and the
// full output gradient flows to x_drend unchanged.
ad::Tape::Ref straight_through_blend(ad::Tape& tape, const Tensor& x_rend, ad::Tape::Ref x_drend);

struct TextureTrainConfig {
    int iterations = 300;
    real step = 0.1;
    int texture_side = 64;
    real dist_lo = 2.4;
    real dist_hi = 3.4;
    real elev_lo = 0.2;
    real elev_hi = 1.1;
    real fov_deg = 45.0;
    uint64_t seed = 0;
};

// Sign-step texture optimization against a frozen classifier: per iteration
// sample a background and a random pose, render, blend through the surrogate
// path, and take one sign step on the cross-entropy toward mesh.label.
// Deterministic given the config seed. iter_loss (optional) records the
// per-iteration loss.
TextureParams train_texture(const model::ModelParams& m, const Mesh& mesh,
                            const Tensor& backgrounds, const TextureTrainConfig& config,
                            std::vector<real>* iter_loss = nullptr);

// Pose grid for texture evaluation: azimuths uniform around the circle,
// elevations and distances on inclusive linear ranges.
struct GridSpec {
    int azimuths = 5;
    int elevations = 5;
    int distances = 4;
    real elev_lo = 0.2;
    real elev_hi = 1.1;
    real dist_lo = 2.4;
    real dist_hi = 3.4;
    real fov_deg = 45.0;
    uint64_t seed = 0; // background choice per pose
};

struct PoseOutcome {
    SceneConfig scene;
    int predicted = -1;
    bool correct = false;
};

struct GridEval {
    int total = 0;
    int correct = 0;
    real accuracy = 0.0;
    std::vector<PoseOutcome> poses;
};

// Renders the textured mesh at every grid pose over a per-pose background,
// optionally applies the weather corruption to the frame, and classifies.
GridEval eval_texture_grid(const model::ModelParams& m, const Mesh& mesh,
                           const TextureParams& texture, const GridSpec& grid,
                           const Tensor& backgrounds,
                           const std::optional<corr::CorruptionSpec>& weather = std::nullopt);

// Texture archive: 8-bit PPM next to a JSON sidecar {mesh_id, label, n,
// seed}; round-trips exactly for already-quantized textures.
void save_texture(const TextureParams& t, const std::string& image_path,
                  const std::string& json_path, const std::string& mesh_id, int label,
                  uint64_t seed);

struct TextureArchive {
    TextureParams texture;
    std::string mesh_id;
    int label = 0;
    uint64_t seed = 0;
};

TextureArchive load_texture(const std::string& image_path, const std::string& json_path);

} // namespace unadv::rf

#endif
