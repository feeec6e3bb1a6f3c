#include "unadv/servo_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "unadv/optim.hpp"
#include "unadv/parallel.hpp"
#include "unadv/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace unadv::servo {

namespace {

constexpr real kPi = 3.14159265358979323846;

real hypot2(const std::array<real, 2>& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1]); }

void require_regressor(const model::ModelParams& m, const char* who) {
    if (m.config.head != model::Head::regression || m.config.outputs != 2)
        throw std::invalid_argument(std::string(who) + ": needs a 2-output regression model");
}

Tensor lift(const Tensor& image) {
    Tensor out({1, image.shape()[0], image.shape()[1], image.shape()[2]});
    std::copy_n(image.data(), image.size(), out.data());
    return out;
}

} // namespace

void validate_world(const WorldState& world) {
    const auto& g = world.ground.shape();
    if (g.size() != 3 || g[0] < 8 || g[0] != g[1] || g[2] != 3)
        throw std::invalid_argument("validate_world: ground must be a square (S,S,3) image with S >= 8, got " +
                                    world.ground.shape_str());
    rf::validate_texture(world.pad_texture);
    if (!(world.pad_size > 0)) throw std::invalid_argument("validate_world: pad size must be positive");
    if (!(world.world_half > 0)) throw std::invalid_argument("validate_world: world half-extent must be positive");
    for (int k = 0; k < 2; ++k)
        if (std::abs(world.pad_center[k]) + world.pad_size / 2 > world.world_half)
            throw std::invalid_argument("validate_world: pad extends outside the world bounds");
    for (real v : world.drone_pos)
        if (!std::isfinite(v)) throw std::invalid_argument("validate_world: non-finite drone position");
    for (real v : world.drone_vel)
        if (!std::isfinite(v)) throw std::invalid_argument("validate_world: non-finite drone velocity");
    if (world.drone_pos[2] < 0.0)
        throw std::invalid_argument("validate_world: drone altitude must be non-negative");
    if (!(world.fov_deg > 0) || !(world.fov_deg < 180))
        throw std::invalid_argument("validate_world: fov must be in (0,180) degrees");
}

int frame_side(const WorldState& world) { return world.ground.shape()[0]; }

rf::TextureParams standard_pad_texture(int n) {
    if (n < 1) throw std::invalid_argument("standard_pad_texture: side must be positive");
    rf::TextureParams t;
    t.values = Tensor({n, n, 3});
    const real c = (n - 1) / 2.0;
    for (int r = 0; r < n; ++r)
        for (int q = 0; q < n; ++q) {
            const real d = std::sqrt((r - c) * (r - c) + (q - c) * (q - c)) / (n / 2.0);
            real rgb[3] = {0.12, 0.12, 0.14}; // dark apron outside the rings
            if (d < 1.0) {
                if (static_cast<int>(std::floor(d * 4.0)) % 2 == 0) {
                    rgb[0] = rgb[1] = rgb[2] = 0.92; // light ring
                } else {
                    rgb[0] = 0.78;
                    rgb[1] = 0.10;
                    rgb[2] = 0.10; // red ring
                }
            }
            for (int ch = 0; ch < 3; ++ch) t.values[(static_cast<int64_t>(r) * n + q) * 3 + ch] = rgb[ch];
        }
    return t;
}

rf::Mesh pad_mesh(const WorldState& world) {
    const real h = world.pad_size / 2;
    const real px = world.pad_center[0], py = world.pad_center[1];
    rf::Mesh m;
    m.vertices = {{px - h, 0, py - h}, {px + h, 0, py - h}, {px + h, 0, py + h}, {px - h, 0, py + h}};
    m.uvs = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    m.tri_vertices = {{0, 1, 2}, {0, 2, 3}};
    m.tri_uvs = {{0, 1, 2}, {0, 2, 3}};
    m.label = 0;
    return m;
}

rf::SceneConfig topdown_scene(const WorldState& world) {
    rf::SceneConfig sc;
    sc.azimuth = 0.0;
    sc.elevation = kPi / 2; // straight down; the renderer switches to its pole up-vector
    sc.distance = world.drone_pos[2];
    sc.fov_deg = world.fov_deg;
    sc.target = {world.drone_pos[0], 0.0, world.drone_pos[1]};
    sc.light_dir = {0.0, 1.0, 0.0}; // vertical light: the flat pad renders unshaded
    return sc;
}

Tensor render_topdown(const WorldState& world, const std::optional<corr::CorruptionSpec>& weather) {
    validate_world(world);
    if (world.drone_pos[2] <= 0.0)
        throw std::invalid_argument("render_topdown: camera is on the ground");
    Tensor frame = rf::rasterize(pad_mesh(world), world.pad_texture, topdown_scene(world), world.ground);
    if (weather)
        frame = corr::corrupt_image(frame, weather->kind, weather->severity, weather->seed);
    return frame;
}

void validate_cone(const ConeSpec& cone) {
    if (!(cone.z_lo > 0) || !(cone.z_hi >= cone.z_lo))
        throw std::invalid_argument("validate_cone: need 0 < z_lo <= z_hi");
    if (!(cone.half_angle_deg > 0) || !(cone.half_angle_deg < 90))
        throw std::invalid_argument("validate_cone: half angle must be in (0,90) degrees");
}

std::array<real, 3> sample_cone_pose(const ConeSpec& cone, const std::array<real, 2>& pad_center,
                                     Rng& rng) {
    // Draw order is part of the determinism contract: altitude, angle, radius.
    const real z = rng.uniform(cone.z_lo, cone.z_hi);
    const real ang = rng.uniform(0.0, 2.0 * kPi);
    const real rmax = z * std::tan(cone.half_angle_deg * kPi / 180.0);
    const real r = rmax * std::sqrt(rng.uniform());
    return {pad_center[0] + r * std::cos(ang), pad_center[1] + r * std::sin(ang), z};
}

PoseDataset collect_pose_dataset(const WorldState& world, const ConeSpec& cone, int count,
                                 uint64_t seed) {
    validate_world(world);
    validate_cone(cone);
    if (count < 1) throw std::invalid_argument("collect_pose_dataset: count must be at least 1");
    const int s = frame_side(world);
    PoseDataset out;
    out.images = Tensor({count, s, s, 3});
    out.targets = Tensor({count, 2});
    out.poses.resize(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng rng(fan_seed(seed, "pose-sample", static_cast<uint64_t>(i)));
        const std::array<real, 3> pos = sample_cone_pose(cone, world.pad_center, rng);
        WorldState w = world;
        w.drone_pos = pos;
        w.drone_vel = {0.0, 0.0};
        out.images.set_batch(i, render_topdown(w));
        out.targets.at(i, 0) = world.pad_center[0] - pos[0];
        out.targets.at(i, 1) = world.pad_center[1] - pos[1];
        out.poses[static_cast<size_t>(i)] = pos;
    }
    return out;
}

real regressor_rmse(const model::ModelParams& m, const Tensor& images, const Tensor& targets) {
    require_regressor(m, "regressor_rmse");
    const auto& s = images.shape();
    if (s.size() != 4 || targets.shape() != std::vector<int>{s[0], 2})
        throw std::invalid_argument("regressor_rmse: need (N,S,S,3) images with (N,2) targets");
    const int n = s[0];
    if (n == 0) return 0.0;
    real sq = 0.0;
    constexpr int kBatch = 256;
    for (int at = 0; at < n; at += kBatch) {
        const int take = std::min(kBatch, n - at);
        Tensor chunk({take, s[1], s[2], s[3]});
        for (int i = 0; i < take; ++i) chunk.set_batch(i, images.slice_batch(at + i));
        const Tensor pred = model::forward_logits(m, chunk);
        for (int i = 0; i < take; ++i)
            for (int k = 0; k < 2; ++k) {
                const real d = pred.at(i, k) - targets.at(at + i, k);
                sq += d * d;
            }
    }
    return std::sqrt(sq / (static_cast<real>(n) * 2.0));
}

model::ModelParams train_pose_regressor(const PoseDataset& data, const model::ModelConfig& mc,
                                        const model::TrainConfig& tc, RegressorReport* report) {
    const auto& s = data.images.shape();
    if (s.size() != 4 || s[0] < 2)
        throw std::invalid_argument("train_pose_regressor: need at least two dataset rows");
    if (data.targets.shape() != std::vector<int>{s[0], 2})
        throw std::invalid_argument("train_pose_regressor: targets must be (N,2)");
    if (mc.head != model::Head::regression || mc.outputs != 2)
        throw std::invalid_argument("train_pose_regressor: config must declare a 2-output regression head");
    const int n = s[0];
    const int n_train = std::max(1, (n * 4) / 5);
    const int n_val = n - n_train;

    Tensor train_x({n_train, s[1], s[2], s[3]});
    Tensor train_y({n_train, 2});
    for (int i = 0; i < n_train; ++i) {
        train_x.set_batch(i, data.images.slice_batch(i));
        train_y.at(i, 0) = data.targets.at(i, 0);
        train_y.at(i, 1) = data.targets.at(i, 1);
    }
    std::vector<model::EpochLog> log;
    model::ModelParams m = model::train_regressor(train_x, train_y, mc, tc, &log);

    Tensor val_x({n_val, s[1], s[2], s[3]});
    Tensor val_y({n_val, 2});
    for (int i = 0; i < n_val; ++i) {
        val_x.set_batch(i, data.images.slice_batch(n_train + i));
        val_y.at(i, 0) = data.targets.at(n_train + i, 0);
        val_y.at(i, 1) = data.targets.at(n_train + i, 1);
    }
    if (report) {
        report->val_rmse = n_val > 0 ? regressor_rmse(m, val_x, val_y) : 0.0;
        report->train_count = n_train;
        report->val_count = n_val;
        report->log = std::move(log);
    }
    return m;
}

std::array<real, 2> pid_step(PIDState& state, const std::array<real, 2>& setpoint,
                             const std::array<real, 2>& current) {
    if (!(state.dt > 0)) throw std::invalid_argument("pid_step: dt must be positive");
    std::array<real, 2> v;
    for (int k = 0; k < 2; ++k) {
        const real e = setpoint[k] - current[k];
        if (!state.primed) state.prev_error[k] = e;
        state.integral[k] += e * state.dt;
        v[k] = state.kp * e + state.kd * (e - state.prev_error[k]) / state.dt +
               state.ki * state.integral[k];
        state.prev_error[k] = e;
    }
    state.primed = true;
    return v;
}

Estimator model_estimator(const model::ModelParams& regressor) {
    require_regressor(regressor, "model_estimator");
    return [m = regressor](const Tensor& frame, const WorldState&) -> std::array<real, 2> {
        const Tensor pred = model::forward_logits(m, lift(frame));
        return {pred.at(0, 0), pred.at(0, 1)};
    };
}

Estimator oracle_estimator() {
    return [](const Tensor&, const WorldState& w) -> std::array<real, 2> {
        return {w.pad_center[0] - w.drone_pos[0], w.pad_center[1] - w.drone_pos[1]};
    };
}

namespace {

void validate_episode_config(const EpisodeConfig& config) {
    if (config.max_steps < 1)
        throw std::invalid_argument("run_episode: max_steps must be at least 1");
    if (!(config.dt > 0)) throw std::invalid_argument("run_episode: dt must be positive");
    if (!(config.descent_rate > 0))
        throw std::invalid_argument("run_episode: descent rate must be positive");
    if (!(config.gate_offset >= 0))
        throw std::invalid_argument("run_episode: gate offset must be non-negative");
    if (!(config.max_speed > 0))
        throw std::invalid_argument("run_episode: max speed must be positive");
    if (!(config.vel_tau > 0))
        throw std::invalid_argument("run_episode: velocity time constant must be positive");
    if (!(config.perception_floor >= 0))
        throw std::invalid_argument("run_episode: perception floor must be non-negative");
}

} // namespace

EpisodeResult run_episode(WorldState world, const Estimator& estimator,
                          const EpisodeConfig& config) {
    validate_world(world);
    validate_episode_config(config);
    if (!estimator) throw std::invalid_argument("run_episode: estimator is empty");
    if (world.drone_pos[2] <= 0.0)
        throw std::invalid_argument("run_episode: drone must start above the ground");

    PIDState pid = config.pid;
    pid.dt = config.dt;
    pid.prev_error = {0.0, 0.0};
    pid.integral = {0.0, 0.0};
    pid.primed = false;

    EpisodeResult out;
    out.trajectory.push_back(world.drone_pos);
    for (int step = 0; step < config.max_steps; ++step) {
        bool gated;
        if (world.drone_pos[2] >= config.perception_floor) {
            std::optional<corr::CorruptionSpec> weather = config.weather;
            if (weather)
                weather->seed = fan_seed(config.weather->seed, "step-weather",
                                         static_cast<uint64_t>(step));
            const Tensor frame = render_topdown(world, weather);
            const std::array<real, 2> est = estimator(frame, world);
            const std::array<real, 2> setpoint = {world.drone_pos[0] + est[0],
                                                  world.drone_pos[1] + est[1]};
            std::array<real, 2> cmd =
                pid_step(pid, setpoint, {world.drone_pos[0], world.drone_pos[1]});
            const real speed = hypot2(cmd);
            if (speed > config.max_speed) {
                cmd[0] *= config.max_speed / speed;
                cmd[1] *= config.max_speed / speed;
            }
            const real blend = std::min(1.0, config.dt / config.vel_tau);
            for (int k = 0; k < 2; ++k) {
                world.drone_vel[k] += (cmd[k] - world.drone_vel[k]) * blend;
                world.drone_pos[k] += world.drone_vel[k] * config.dt;
            }
            gated = hypot2(est) <= config.gate_offset;
        } else {
            world.drone_vel = {0.0, 0.0}; // committed final descent
            gated = true;
        }
        if (gated) world.drone_pos[2] -= config.descent_rate * config.dt;
        out.steps = step + 1;
        out.trajectory.push_back(world.drone_pos);
        if (world.drone_pos[2] <= 0.0) {
            world.drone_pos[2] = 0.0;
            out.trajectory.back()[2] = 0.0;
            break;
        }
    }
    out.final_offset = std::hypot(world.drone_pos[0] - world.pad_center[0],
                                  world.drone_pos[1] - world.pad_center[1]);
    out.landed = world.drone_pos[2] <= 0.0 && out.final_offset <= world.pad_size / 2;
    return out;
}

EpisodeBatch run_episodes(const WorldState& world, const ConeSpec& cone,
                          const Estimator& estimator, const EpisodeConfig& config, int episodes,
                          uint64_t seed) {
    validate_world(world);
    validate_cone(cone);
    validate_episode_config(config);
    if (episodes < 0) throw std::invalid_argument("run_episodes: episode count must be non-negative");

    EpisodeBatch batch;
    batch.episodes.resize(static_cast<size_t>(episodes));
#pragma omp parallel for schedule(dynamic) if (parallel::enabled())
    for (int i = 0; i < episodes; ++i) {
        WorldState w = world;
        Rng rng(fan_seed(seed, "episode-start", static_cast<uint64_t>(i)));
        w.drone_pos = sample_cone_pose(cone, w.pad_center, rng);
        w.drone_vel = {0.0, 0.0};
        EpisodeConfig cfg = config;
        if (cfg.weather)
            cfg.weather->seed = fan_seed(seed, "episode-weather", static_cast<uint64_t>(i));
        batch.episodes[static_cast<size_t>(i)] = run_episode(w, estimator, cfg);
    }
    int64_t landed_steps = 0;
    for (const EpisodeResult& r : batch.episodes) {
        if (r.landed) {
            batch.landed_count += 1;
            landed_steps += r.steps;
        }
    }
    batch.land_rate = episodes > 0 ? static_cast<real>(batch.landed_count) / episodes : 0.0;
    batch.mean_steps_landed =
        batch.landed_count > 0 ? static_cast<real>(landed_steps) / batch.landed_count : 0.0;
    return batch;
}

rf::TextureParams train_pad_texture(const model::ModelParams& regressor, const WorldState& world,
                                    const PadTextureConfig& config, std::vector<real>* iter_loss) {
    validate_world(world);
    require_regressor(regressor, "train_pad_texture");
    validate_cone(config.cone);
    if (config.iterations < 0)
        throw std::invalid_argument("train_pad_texture: iterations must be non-negative");
    if (!(config.step > 0)) throw std::invalid_argument("train_pad_texture: step must be positive");
    if (config.texture_side < 1)
        throw std::invalid_argument("train_pad_texture: texture side must be positive");
    const int s = frame_side(world);
    if (regressor.config.input_h != s || regressor.config.input_w != s ||
        regressor.config.input_c != 3)
        throw std::invalid_argument("train_pad_texture: regressor input does not match the world frame");

    if (iter_loss) iter_loss->clear();
    rf::TextureParams tex =
        rf::TextureParams::make(config.texture_side, fan_seed(config.seed, "pad-texture-init"));
    if (config.iterations == 0) return tex;

    const Tensor bg = lift(world.ground);
    Rng rng(fan_seed(config.seed, "pad-texture-scene"));
    for (int it = 0; it < config.iterations; ++it) {
        WorldState w = world;
        w.drone_pos = sample_cone_pose(config.cone, w.pad_center, rng);
        w.pad_texture = tex;
        const rf::Mesh mesh = pad_mesh(w);
        const rf::SceneConfig scene = topdown_scene(w);
        const Tensor x_rend = rf::rasterize(mesh, tex, scene, bg);
        const rf::UVImage x_uv = rf::rasterize_uv(mesh, scene, s, s);

        Tensor target({1, 2});
        target.at(0, 0) = w.pad_center[0] - w.drone_pos[0];
        target.at(0, 1) = w.pad_center[1] - w.drone_pos[1];

        ad::Tape tape;
        const auto tref = tape.input(tex.values, true);
        const auto drend = rf::surrogate_composite_op(tape, tref, x_uv, bg);
        const auto unadv = rf::straight_through_blend(tape, x_rend, drend);
        const auto params = model::push_params(tape, regressor, false);
        const auto pred = model::forward_from(tape, regressor.config, unadv, params);
        const auto loss = tape.mse(pred, target);
        const Tensor grad = tape.backward(loss, {tref})[0];
        if (iter_loss) iter_loss->push_back(tape.value(loss)[0]);
        optim::sign_update(tex.values, grad, config.step);
    }
    return tex;
}

void write_episode_csv(const std::string& path, const EpisodeBatch& batch) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_episode_csv: cannot open " + path);
    f << "episode,landed,steps,final_offset\n";
    char buf[96];
    for (size_t i = 0; i < batch.episodes.size(); ++i) {
        const EpisodeResult& r = batch.episodes[i];
        std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.6f\n", i, r.landed ? 1 : 0, r.steps,
                      r.final_offset);
        f << buf;
    }
    if (!f) throw std::runtime_error("write_episode_csv: write failed for " + path);
}

} // namespace unadv::servo
