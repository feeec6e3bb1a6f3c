#ifndef UNADV_SERVO_SIM_HPP
#define UNADV_SERVO_SIM_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "unadv/corruption.hpp"
#include "unadv/model.hpp"
#include "unadv/render_forge.hpp"
#include "unadv/rng.hpp"
#include "unadv/tensor.hpp"

namespace unadv::servo {

// Flat world: the ground is the z=0 plane, the drone flies above it with a
// downward camera, and a square textured pad lies on the ground. The camera
// frame side equals the ground backdrop side.
struct WorldState {
    std::array<real, 3> drone_pos = {0.0, 0.0, 2.5}; // x, y, altitude (m)
    std::array<real, 2> drone_vel = {0.0, 0.0};      // planar velocity (m/s)
    std::array<real, 2> pad_center = {0.0, 0.0};
    real pad_size = 1.0;   // square pad side (m); "on pad" means within pad_size/2
    real world_half = 4.0; // pad must lie inside [-world_half, world_half]^2
    real fov_deg = 90.0;
    rf::TextureParams pad_texture;
    Tensor ground; // (S,S,3) backdrop seen where the pad is not
};

void validate_world(const WorldState& world);
int frame_side(const WorldState& world);

// Concentric-ring heliport texture (alternating light/red rings on a dark
// square), the "standard" pad of the paired comparisons.
rf::TextureParams standard_pad_texture(int n);

// The pad as renderable geometry / the downward camera at the drone's
// position. render_topdown is rasterize(pad_mesh, pad_texture, topdown_scene,
// ground) plus optional weather (corruption seeded by weather->seed);
// exposed separately so texture training can reuse the exact same scene.
rf::Mesh pad_mesh(const WorldState& world);
rf::SceneConfig topdown_scene(const WorldState& world);
Tensor render_topdown(const WorldState& world,
                      const std::optional<corr::CorruptionSpec>& weather = std::nullopt);

// Feasible drone poses: uniform over an upside-down cone with its vertex at
// the pad center, between altitudes z_lo and z_hi.
struct ConeSpec {
    real z_lo = 1.5;
    real z_hi = 4.0;
    real half_angle_deg = 15.0;
};

void validate_cone(const ConeSpec& cone);
std::array<real, 3> sample_cone_pose(const ConeSpec& cone, const std::array<real, 2>& pad_center,
                                     Rng& rng);

struct PoseDataset {
    Tensor images;  // (N,S,S,3) clear-weather top-down frames
    Tensor targets; // (N,2) pad offset relative to the drone, meters
    std::vector<std::array<real, 3>> poses; // drone position per row
};

// Renders `count` frames from cone-sampled poses over the template world.
// Deterministic given the seed; row i depends only on (seed, i).
PoseDataset collect_pose_dataset(const WorldState& world, const ConeSpec& cone, int count,
                                 uint64_t seed);

struct RegressorReport {
    real val_rmse = 0.0; // per-coordinate RMSE over the validation split
    int train_count = 0;
    int val_count = 0;
    std::vector<model::EpochLog> log;
};

// 80/20 split in dataset order (rows are already i.i.d. by construction),
// MSE training via the shared loop, validation RMSE on the held-out tail.
model::ModelParams train_pose_regressor(const PoseDataset& data, const model::ModelConfig& mc,
                                        const model::TrainConfig& tc,
                                        RegressorReport* report = nullptr);

real regressor_rmse(const model::ModelParams& m, const Tensor& images, const Tensor& targets);

// Two-axis PID with the derivative seeded to zero on the first step.
struct PIDState {
    real kp = 5.0;
    real kd = 5.0;
    real ki = 0.0;
    real dt = 0.1;
    std::array<real, 2> prev_error = {0.0, 0.0};
    std::array<real, 2> integral = {0.0, 0.0};
    bool primed = false;
};

// e = setpoint - current; v = kp*e + kd*(e - e_prev)/dt + ki*I where the
// integral I accumulates e*dt including the current step.
std::array<real, 2> pid_step(PIDState& state, const std::array<real, 2>& setpoint,
                             const std::array<real, 2>& current);

// Anything that turns a frame into an estimated pad offset (meters, relative
// to the drone). The world argument lets the oracle peek at the truth.
using Estimator = std::function<std::array<real, 2>(const Tensor& frame, const WorldState& world)>;

Estimator model_estimator(const model::ModelParams& regressor);
Estimator oracle_estimator();

struct EpisodeConfig {
    int max_steps = 500;
    real dt = 0.1;
    real descent_rate = 0.25;   // m/s, applied only when descent is gated on
    real gate_offset = 0.3;     // descend while |estimate| <= this (meters)
    real max_speed = 2.0;       // planar command saturation (norm)
    real vel_tau = 0.4;         // first-order velocity response time constant (s)
    real perception_floor = 0.8; // below this altitude: hold planar position, commit
    PIDState pid;               // gains template; its dt is replaced by config.dt
    std::optional<corr::CorruptionSpec> weather; // per-step seeds fan from weather->seed
};

struct EpisodeResult {
    bool landed = false; // touched down within pad_size/2 of the pad center
    int steps = 0;
    real final_offset = 0.0;
    std::vector<std::array<real, 3>> trajectory; // positions, start included
};

// Closed loop: render, estimate, PID toward the estimated pad position, and
// integrate. The commanded velocity is saturated, then the drone's velocity
// relaxes toward it with time constant vel_tau (the drone has inertia; this
// also keeps the sampled derivative term from ringing), and position
// integrates the velocity. Descent runs while the estimate is inside the
// gate, and always below the perception floor (where no frame is rendered
// and the drone holds its planar position). Ends on touchdown (z reaches 0)
// or after max_steps.
EpisodeResult run_episode(WorldState world, const Estimator& estimator,
                          const EpisodeConfig& config);

struct EpisodeBatch {
    std::vector<EpisodeResult> episodes;
    int landed_count = 0;
    real land_rate = 0.0;
    real mean_steps_landed = 0.0; // over landed episodes; 0 if none landed
};

// Independent episodes from cone-sampled starts; episode i draws its start
// and weather seeds from (seed, i) only, so batches are order-independent
// and pads can be compared pairwise under identical conditions.
EpisodeBatch run_episodes(const WorldState& world, const ConeSpec& cone,
                          const Estimator& estimator, const EpisodeConfig& config, int episodes,
                          uint64_t seed);

struct PadTextureConfig {
    int iterations = 400;
    real step = 0.05;
    int texture_side = 48;
    ConeSpec cone;
    uint64_t seed = 0;
};

// Sign-step texture optimization against a frozen pose regressor: sample a
// cone pose, render the pad clear-weather, blend through the surrogate path,
// and step down the squared offset error. Deterministic given the seed.
rf::TextureParams train_pad_texture(const model::ModelParams& regressor, const WorldState& world,
                                    const PadTextureConfig& config,
                                    std::vector<real>* iter_loss = nullptr);

// Per-episode CSV: header episode,landed,steps,final_offset; one row per
// episode in order.
void write_episode_csv(const std::string& path, const EpisodeBatch& batch);

} // namespace unadv::servo

#endif
